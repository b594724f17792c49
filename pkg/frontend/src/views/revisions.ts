// Revision history panel with on-demand diffs between any revision and
// the one before it (or the active one).

import type { DiffEntry, RevisionInfo } from "../api.js";

export function renderHistory(
  el: HTMLElement,
  history: RevisionInfo[],
  activeRevision: number | null,
  onDiff: (revA: number, revB: number) => void,
): void {
  el.textContent = "";
  if (history.length === 0) {
    el.textContent = "no revisions";
    return;
  }
  const list = document.createElement("ol");
  list.className = "revision-list";
  for (const rev of [...history].reverse()) {
    const item = document.createElement("li");
    item.dataset.revision = String(rev.revision);
    const marker = rev.revision === activeRevision ? "● " : "";
    const text = document.createElement("span");
    text.textContent = `${marker}r${rev.revision} — ${rev.note || "(no note)"}`;
    item.appendChild(text);
    if (rev.parent !== null && rev.parent !== undefined) {
      const diffButton = document.createElement("button");
      diffButton.type = "button";
      diffButton.textContent = "diff vs parent";
      diffButton.dataset.role = `diff-${rev.revision}`;
      diffButton.addEventListener("click", () => onDiff(rev.parent as number, rev.revision));
      item.appendChild(diffButton);
    }
    list.appendChild(item);
  }
  el.appendChild(list);
}

export function renderDiff(
  el: HTMLElement,
  revA: number,
  revB: number,
  changes: DiffEntry[],
): void {
  el.textContent = "";
  const caption = document.createElement("div");
  caption.className = "panel-caption";
  caption.textContent = `changes from r${revA} to r${revB}`;
  el.appendChild(caption);
  if (changes.length === 0) {
    const none = document.createElement("div");
    none.textContent = "no changes";
    el.appendChild(none);
    return;
  }
  for (const change of changes) {
    const box = document.createElement("div");
    box.className = "diff-class";
    const title = document.createElement("h4");
    title.textContent = change.class_label;
    box.appendChild(title);
    const list = document.createElement("ul");
    for (const f of change.added) {
      const li = document.createElement("li");
      li.textContent = `+ ${f.text} (weight ${f.weight}, ${f.kind})`;
      li.className = "added";
      list.appendChild(li);
    }
    for (const f of change.removed) {
      const li = document.createElement("li");
      li.textContent = `− ${f.text} (weight ${f.weight}, ${f.kind})`;
      li.className = "removed";
      list.appendChild(li);
    }
    for (const w of change.weight_changes) {
      const li = document.createElement("li");
      li.textContent = `~ ${w.text}: weight ${w.from} → ${w.to}`;
      li.className = "changed";
      list.appendChild(li);
    }
    box.appendChild(list);
    el.appendChild(box);
  }
}
