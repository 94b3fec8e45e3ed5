// Annotation domains, mirroring the gateway's server-side validation so a
// draft the UI accepts is exactly a record the server accepts.

export const TOP_CATEGORIES = ["non-translation", "accuracy", "fluency"] as const;
export type TopCategory = (typeof TOP_CATEGORIES)[number];

export const ACCURACY_SUBS = [
  "addition",
  "omission",
  "mistranslation",
  "untranslated-text",
] as const;

export const FLUENCY_SUBS = [
  "punctuation",
  "spelling",
  "grammar",
  "register",
  "inconsistency",
  "character-encoding",
] as const;

export type SubCategory =
  | (typeof ACCURACY_SUBS)[number]
  | (typeof FLUENCY_SUBS)[number];

export const SEVERITIES = ["minor", "major", "non-translation"] as const;
export type Severity = (typeof SEVERITIES)[number];

export const SQM_MIN = 0;
export const SQM_MAX = 6;

export interface ErrorTag {
  top: TopCategory;
  sub?: SubCategory;
  severity: Severity;
  span?: [number, number];
  note?: string;
}

export interface OutputDraft {
  level: number | null;
  tags: ErrorTag[];
}

export function subsFor(top: TopCategory): readonly SubCategory[] {
  if (top === "accuracy") return ACCURACY_SUBS;
  if (top === "fluency") return FLUENCY_SUBS;
  return [];
}

export function validSqmLevel(level: unknown): level is number {
  return (
    typeof level === "number" &&
    Number.isInteger(level) &&
    level >= SQM_MIN &&
    level <= SQM_MAX
  );
}

/** Problems with one error tag; empty list means the tag is submittable. */
export function tagProblems(tag: ErrorTag, outputText: string): string[] {
  const problems: string[] = [];
  if (!TOP_CATEGORIES.includes(tag.top)) {
    problems.push(`unknown category ${String(tag.top)}`);
  } else if (tag.top === "non-translation") {
    if (tag.sub !== undefined) {
      problems.push("non-translation takes no sub-category");
    }
    if (tag.severity !== "non-translation") {
      problems.push("non-translation pairs only with non-translation severity");
    }
  } else {
    const allowed = subsFor(tag.top);
    if (tag.sub === undefined || !allowed.includes(tag.sub)) {
      problems.push(`category ${tag.top} needs a sub-category of: ${allowed.join(", ")}`);
    }
    if (tag.severity === "non-translation") {
      problems.push("non-translation severity pairs only with the non-translation category");
    } else if (!SEVERITIES.includes(tag.severity)) {
      problems.push(`unknown severity ${String(tag.severity)}`);
    }
  }
  if (tag.span !== undefined) {
    const [start, end] = tag.span;
    if (!Number.isInteger(start) || !Number.isInteger(end) || start < 0 || end < start) {
      problems.push(`bad span [${start}, ${end}]`);
    } else if (end > outputText.length) {
      problems.push(`span end ${end} exceeds the output length ${outputText.length}`);
    }
  }
  return problems;
}

/** Problems with a whole per-output draft. */
export function draftProblems(draft: OutputDraft, outputText: string): string[] {
  const problems: string[] = [];
  if (!validSqmLevel(draft.level)) {
    problems.push(`SQM level must be an integer ${SQM_MIN}..${SQM_MAX}`);
  }
  draft.tags.forEach((tag, i) => {
    for (const p of tagProblems(tag, outputText)) problems.push(`tag ${i + 1}: ${p}`);
  });
  return problems;
}
