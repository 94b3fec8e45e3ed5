// Annotation session flow: one item at a time, a draft per blinded output,
// submission only when every control is inside the server's domain. Drafts
// clear only after the records are acknowledged (by the server, or durably
// queued while offline with the server as later arbiter).

import {
  AnnotationRecord,
  ApiError,
  GatewayClient,
  ItemPayload,
  NetworkError,
  Progress,
} from "./api.js";
import { OfflineQueue } from "./queue.js";
import { draftProblems, ErrorTag, OutputDraft } from "./schema.js";

export type Phase = "loading" | "annotating" | "done" | "error";

export interface FlowView {
  phase: Phase;
  progress: Progress;
  item: ItemPayload | null;
  drafts: Map<string, OutputDraft>;
  banner: string | null;
  queued: number;
}

function emptyDraft(): OutputDraft {
  return { level: null, tags: [] };
}

export class SessionFlow {
  phase: Phase = "loading";
  progress: Progress = { done: 0, total: 0 };
  item: ItemPayload | null = null;
  drafts = new Map<string, OutputDraft>();
  banner: string | null = null;
  reportUrl: string | null = null;

  constructor(
    private client: GatewayClient,
    private session: string,
    private annotator: string,
    private queue: OfflineQueue,
  ) {}

  view(): FlowView {
    return {
      phase: this.phase,
      progress: this.progress,
      item: this.item,
      drafts: this.drafts,
      banner: this.banner,
      queued: this.queue.length,
    };
  }

  /** Fetch the next task; on network trouble show a retry banner, losing nothing. */
  async loadTask(): Promise<void> {
    this.phase = "loading";
    this.banner = null;
    try {
      if (this.queue.length > 0) {
        await this.queue.flush(this.client);
      }
      const next = await this.client.next(this.session, this.annotator);
      this.progress = next.progress;
      if (next.done) {
        this.phase = "done";
        this.item = null;
        this.reportUrl = next.report_url ?? null;
        return;
      }
      this.item = next.item!;
      this.drafts = new Map(this.item.outputs.map((o) => [o.label, emptyDraft()]));
      this.phase = "annotating";
    } catch (err) {
      this.phase = "error";
      this.banner =
        err instanceof NetworkError
          ? "gateway unreachable; retry when back online"
          : String(err instanceof Error ? err.message : err);
    }
  }

  private draft(label: string): OutputDraft {
    const draft = this.drafts.get(label);
    if (!draft) throw new Error(`no output labelled ${label}`);
    return draft;
  }

  private outputText(label: string): string {
    const output = this.item?.outputs.find((o) => o.label === label);
    if (!output) throw new Error(`no output labelled ${label}`);
    return output.text;
  }

  setLevel(label: string, level: number): void {
    this.draft(label).level = level;
  }

  addTag(label: string, tag: ErrorTag): string[] {
    const problems = this.tagCheck(label, tag);
    if (problems.length === 0) this.draft(label).tags.push(tag);
    return problems;
  }

  tagCheck(label: string, tag: ErrorTag): string[] {
    return draftProblems({ level: 0, tags: [tag] }, this.outputText(label)).filter(
      (p) => p.startsWith("tag"),
    );
  }

  removeTag(label: string, index: number): void {
    this.draft(label).tags.splice(index, 1);
  }

  /** Per-output validation problems; empty map means submittable. */
  problems(): Map<string, string[]> {
    const out = new Map<string, string[]>();
    for (const [label, draft] of this.drafts) {
      const issues = draftProblems(draft, this.outputText(label));
      if (issues.length) out.set(label, issues);
    }
    return out;
  }

  /** One record per tagged error plus one SQM record per output. The SQM
   * record goes last so a half-submitted output stays incomplete on the
   * server and is re-served after a crash. */
  buildRecords(): AnnotationRecord[] {
    if (!this.item) throw new Error("nothing to submit");
    const records: AnnotationRecord[] = [];
    for (const output of this.item.outputs) {
      const draft = this.draft(output.label);
      for (const tag of draft.tags) {
        const record: AnnotationRecord = {
          session: this.session,
          segment_id: this.item.segment_id,
          blind_label: output.label,
          annotator: this.annotator,
          kind: "mqm",
          category: tag.top,
          severity: tag.severity,
        };
        if (tag.sub !== undefined) record.sub_category = tag.sub;
        if (tag.span !== undefined) record.span = tag.span;
        if (tag.note) record.note = tag.note;
        records.push(record);
      }
      records.push({
        session: this.session,
        segment_id: this.item.segment_id,
        blind_label: output.label,
        annotator: this.annotator,
        kind: "sqm",
        level: draft.level as number,
      });
    }
    return records;
  }

  /**
   * Submit the current item. Invalid drafts never issue a request. Server
   * rejections keep the draft for correction; network failures queue the
   * rest durably and advance optimistically.
   */
  async submit(): Promise<{ ok: boolean; problems: Map<string, string[]> }> {
    const problems = this.problems();
    if (problems.size > 0) {
      return { ok: false, problems };
    }
    const records = this.buildRecords();
    for (let i = 0; i < records.length; i += 1) {
      try {
        await this.client.postAnnotation(records[i]);
      } catch (err) {
        if (err instanceof NetworkError) {
          for (const record of records.slice(i)) this.queue.push(record);
          this.banner = `offline: ${records.length - i} records queued for replay`;
          break;
        }
        if (err instanceof ApiError) {
          this.banner = `server rejected a record: ${err.message}`;
          return { ok: false, problems: new Map([["server", [err.message]]]) };
        }
        throw err;
      }
    }
    this.drafts = new Map(); // acknowledged (or durably queued): clear
    await this.loadTask();
    return { ok: true, problems: new Map() };
  }

  /** Server-derived progress summary: completion fraction plus the
   * per-category tag counts from the session report. */
  async reviewProgress(): Promise<{
    completion: number;
    tagCounts: Record<string, number>;
  }> {
    const next = await this.client.next(this.session, this.annotator);
    const report = await this.client.report(this.session);
    const errorCounts = report.error_counts as {
      by_system: Record<string, Record<string, number>>;
    };
    const tagCounts: Record<string, number> = {};
    for (const row of Object.values(errorCounts.by_system)) {
      for (const [category, count] of Object.entries(row)) {
        tagCounts[category] = (tagCounts[category] ?? 0) + count;
      }
    }
    const { done, total } = next.progress;
    return { completion: total === 0 ? 1 : done / total, tagCounts };
  }
}
