// Thin DOM layer: renders a SessionFlow and wires the controls. All
// decisions live in state.ts/schema.ts; this file only draws.

import {
  SEVERITIES,
  SQM_MAX,
  SQM_MIN,
  subsFor,
  TOP_CATEGORIES,
  TopCategory,
  Severity,
  SubCategory,
} from "./schema.js";
import { SessionFlow } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Array<Node | string>
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

export function mount(root: HTMLElement, flow: SessionFlow): void {
  const render = () => {
    root.replaceChildren(build(flow, render));
  };
  render();
}

function build(flow: SessionFlow, rerender: () => void): HTMLElement {
  const view = flow.view();
  const page = el("div", { class: "page" });

  const bar = el("div", { class: "progress" });
  const frac = view.progress.total
    ? `${view.progress.done}/${view.progress.total}`
    : "-";
  bar.append(el("span", {}, `items done: ${frac}`));
  if (view.queued > 0) {
    bar.append(el("span", { class: "queued" }, ` (${view.queued} queued offline)`));
  }
  page.append(bar);

  if (view.banner) {
    const banner = el("div", { class: "banner" }, view.banner, " ");
    const retry = el("button", {}, "retry");
    retry.onclick = () => flow.loadTask().then(rerender);
    banner.append(retry);
    page.append(banner);
  }

  if (view.phase === "loading") {
    page.append(el("p", {}, "loading next item..."));
    return page;
  }
  if (view.phase === "done") {
    page.append(
      el("p", {}, "session complete. "),
      el("a", { href: flow.reportUrl ?? "#" }, "view the session report"),
    );
    return page;
  }
  if (view.phase === "error" || !view.item) {
    return page;
  }

  const item = view.item;
  page.append(
    el("section", { class: "text source" },
      el("h3", {}, "Source"), el("p", {}, item.source)),
    el("section", { class: "text reference" },
      el("h3", {}, "Reference"), el("p", {}, item.reference)),
  );

  for (const output of item.outputs) {
    const draft = view.drafts.get(output.label)!;
    const box = el("section", { class: "output" },
      el("h3", {}, `System ${output.label}`),
      el("p", { class: "candidate", id: `text-${output.label}` }, output.text));

    // SQM slider, integer 0..6 only
    const slider = el("input", {
      type: "range", min: String(SQM_MIN), max: String(SQM_MAX), step: "1",
      value: draft.level === null ? "3" : String(draft.level),
    });
    const levelLabel = el("span", { class: "level" },
      draft.level === null ? "unrated" : String(draft.level));
    slider.oninput = () => {
      flow.setLevel(output.label, Number(slider.value));
      levelLabel.textContent = slider.value;
    };
    box.append(el("div", { class: "sqm" }, "SQM: ", slider, levelLabel));

    // existing tags
    const tagList = el("ul", { class: "tags" });
    draft.tags.forEach((tag, i) => {
      const remove = el("button", {}, "remove");
      remove.onclick = () => { flow.removeTag(output.label, i); rerender(); };
      tagList.append(el("li", {},
        `${tag.top}${tag.sub ? "/" + tag.sub : ""} [${tag.severity}]` +
        (tag.span ? ` @${tag.span[0]}-${tag.span[1]}` : ""),
        " ", remove));
    });
    box.append(tagList);

    // tag editor: category, sub, severity, optional selected span
    const topSel = el("select", {});
    for (const top of TOP_CATEGORIES) topSel.append(el("option", { value: top }, top));
    const subSel = el("select", {});
    const sevSel = el("select", {});
    const syncSubs = () => {
      subSel.replaceChildren();
      for (const sub of subsFor(topSel.value as TopCategory)) {
        subSel.append(el("option", { value: sub }, sub));
      }
      subSel.disabled = topSel.value === "non-translation";
      sevSel.replaceChildren();
      const severities = topSel.value === "non-translation"
        ? ["non-translation"] : SEVERITIES.filter((s) => s !== "non-translation");
      for (const severity of severities) {
        sevSel.append(el("option", { value: severity }, severity));
      }
    };
    topSel.onchange = syncSubs;
    syncSubs();
    const addButton = el("button", {}, "tag error");
    const problemsBox = el("div", { class: "problems" });
    addButton.onclick = () => {
      const span = selectedSpanIn(`text-${output.label}`, output.text);
      const problems = flow.addTag(output.label, {
        top: topSel.value as TopCategory,
        sub: subSel.disabled ? undefined : (subSel.value as SubCategory),
        severity: sevSel.value as Severity,
        span: span ?? undefined,
      });
      if (problems.length) {
        problemsBox.replaceChildren(...problems.map((p) => el("p", {}, p)));
      } else {
        rerender();
      }
    };
    box.append(
      el("div", { class: "editor" }, topSel, subSel, sevSel, addButton),
      problemsBox,
    );
    page.append(box);
  }

  const submit = el("button", { class: "submit" }, "submit item");
  const submitProblems = el("div", { class: "problems" });
  submit.onclick = async () => {
    submit.disabled = true;
    const result = await flow.submit();
    if (!result.ok) {
      submitProblems.replaceChildren(
        ...[...result.problems.entries()].map(([label, issues]) =>
          el("p", {}, `${label}: ${issues.join("; ")}`)),
      );
      submit.disabled = false;
    } else {
      rerender();
    }
  };
  page.append(submit, submitProblems);
  return page;
}

/** Character offsets of the current selection inside the output element. */
function selectedSpanIn(elementId: string, text: string): [number, number] | null {
  const selection = window.getSelection();
  if (!selection || selection.isCollapsed) return null;
  const container = document.getElementById(elementId);
  if (!container || !container.contains(selection.anchorNode)) return null;
  const selected = selection.toString();
  const start = text.indexOf(selected);
  if (start < 0) return null;
  return [start, start + selected.length];
}
