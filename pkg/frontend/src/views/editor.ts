// Feature editor: pick a class, adjust weights or remove features in a
// local draft, stage a new feature from the buffer, commit the draft as a
// new revision. Commit stays disabled until the draft is valid and
// actually different from the active snapshot.

import type { AnnotationSnapshot } from "../api.js";
import {
  snapshotsEqual,
  validateBuffer,
  validateSnapshot,
  type EditorBuffer,
  type ViewModel,
} from "../state.js";

export interface EditorHandlers {
  onSelectClass: (label: string) => void;
  onBufferChange: (buffer: EditorBuffer) => void;
  onAddFeature: () => void;
  onWeightChange: (label: string, index: number, weight: number) => void;
  onRemoveFeature: (label: string, index: number) => void;
  onCommit: (note: string) => void;
  onDiscard: () => void;
}

export function renderEditor(el: HTMLElement, vm: ViewModel, handlers: EditorHandlers): void {
  el.textContent = "";
  if (!vm.annotations || !vm.draft) {
    el.textContent = "annotations not loaded";
    return;
  }
  const caption = document.createElement("div");
  caption.className = "panel-caption";
  caption.textContent = `editing on top of revision ${vm.revision}`;
  el.appendChild(caption);

  const select = document.createElement("select");
  select.dataset.role = "class-select";
  for (const label of Object.keys(vm.draft.classes).sort()) {
    const option = document.createElement("option");
    option.value = label;
    option.textContent = `${label} (${vm.draft.classes[label].length})`;
    option.selected = label === vm.editorClass;
    select.appendChild(option);
  }
  select.addEventListener("change", () => handlers.onSelectClass(select.value));
  el.appendChild(select);

  const label = vm.editorClass;
  if (label && vm.draft.classes[label]) {
    const table = document.createElement("table");
    table.className = "feature-table";
    vm.draft.classes[label].forEach((feature, index) => {
      const row = table.insertRow();
      row.insertCell().textContent = feature.text;
      row.insertCell().textContent = feature.kind;
      const weightCell = row.insertCell();
      const weight = document.createElement("input");
      weight.type = "number";
      weight.step = "0.1";
      weight.value = String(feature.weight);
      weight.dataset.role = `weight-${index}`;
      weight.addEventListener("change", () =>
        handlers.onWeightChange(label, index, Number(weight.value)),
      );
      weightCell.appendChild(weight);
      const removeCell = row.insertCell();
      const remove = document.createElement("button");
      remove.type = "button";
      remove.textContent = "remove";
      remove.dataset.role = `remove-${index}`;
      remove.addEventListener("click", () => handlers.onRemoveFeature(label, index));
      removeCell.appendChild(remove);
    });
    el.appendChild(table);
  }

  // buffer row for a new feature
  const bufferBox = document.createElement("div");
  bufferBox.className = "buffer";
  const text = document.createElement("input");
  text.type = "text";
  text.placeholder = "new feature text";
  text.value = vm.buffer.text;
  text.dataset.role = "buffer-text";
  const weight = document.createElement("input");
  weight.type = "number";
  weight.step = "0.1";
  weight.value = String(vm.buffer.weight);
  weight.dataset.role = "buffer-weight";
  const kind = document.createElement("select");
  kind.dataset.role = "buffer-kind";
  for (const value of ["long-sentence", "common-short"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    option.selected = value === vm.buffer.kind;
    kind.appendChild(option);
  }
  const propagate = () =>
    handlers.onBufferChange({
      text: text.value,
      weight: Number(weight.value),
      kind: kind.value,
    });
  text.addEventListener("input", propagate);
  weight.addEventListener("input", propagate);
  kind.addEventListener("change", propagate);

  const add = document.createElement("button");
  add.type = "button";
  add.dataset.role = "add-feature";
  add.textContent = "add feature";
  const bufferProblems = validateBuffer(vm.buffer);
  add.disabled = bufferProblems.length > 0 || !label;
  add.addEventListener("click", () => handlers.onAddFeature());
  bufferBox.append(text, weight, kind, add);
  el.appendChild(bufferBox);

  if (bufferProblems.length > 0 && vm.buffer.text !== "") {
    const problems = document.createElement("div");
    problems.className = "problems";
    problems.dataset.role = "buffer-problems";
    problems.textContent = bufferProblems.join("; ");
    el.appendChild(problems);
  }

  // commit controls
  const commitBox = document.createElement("div");
  commitBox.className = "commit";
  const note = document.createElement("input");
  note.type = "text";
  note.placeholder = "change note";
  note.dataset.role = "commit-note";
  const commit = document.createElement("button");
  commit.type = "button";
  commit.dataset.role = "commit";
  commit.textContent = "commit revision";
  const draftProblems = validateSnapshot(vm.draft);
  commit.disabled =
    draftProblems.length > 0 || snapshotsEqual(vm.annotations, vm.draft);
  commit.addEventListener("click", () => handlers.onCommit(note.value));
  const discard = document.createElement("button");
  discard.type = "button";
  discard.dataset.role = "discard";
  discard.textContent = "discard draft";
  discard.disabled = snapshotsEqual(vm.annotations, vm.draft);
  discard.addEventListener("click", () => handlers.onDiscard());
  commitBox.append(note, commit, discard);
  el.appendChild(commitBox);

  if (vm.conflict) {
    const conflict = document.createElement("div");
    conflict.className = "conflict";
    conflict.dataset.role = "conflict";
    conflict.textContent =
      "someone committed a newer revision; reload it and re-apply your edit";
    const retry = document.createElement("button");
    retry.type = "button";
    retry.dataset.role = "conflict-reload";
    retry.textContent = "reload latest revision";
    retry.addEventListener("click", () => handlers.onDiscard());
    conflict.appendChild(retry);
    el.appendChild(conflict);
  }
}

export function addBufferToDraft(
  draft: AnnotationSnapshot,
  label: string,
  buffer: EditorBuffer,
): AnnotationSnapshot {
  const next = JSON.parse(JSON.stringify(draft)) as AnnotationSnapshot;
  next.classes[label] = next.classes[label] ?? [];
  next.classes[label].push({
    text: buffer.text.trim(),
    weight: buffer.weight,
    kind: buffer.kind,
  });
  return next;
}
