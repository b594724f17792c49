// Confusion explorer: truth rows, predicted columns, counts exactly as
// reported. Clicking a cell selects it for the breakdown inspector.

import type { EvaluationReport } from "../api.js";
import { exact, type SelectedCell } from "../state.js";

export function renderConfusion(
  el: HTMLElement,
  report: EvaluationReport | null,
  selected: SelectedCell | null,
  onCell: (truth: string, predicted: string) => void,
): void {
  el.textContent = "";
  if (!report) {
    el.textContent = "no evaluation yet";
    return;
  }
  const caption = document.createElement("div");
  caption.className = "panel-caption";
  caption.dataset.role = "confusion-caption";
  caption.textContent =
    `revision ${exact(report.revision)} · split ${report.split} · ` +
    `accuracy ${exact(report.accuracy)} (${exact(report.correct)}/${exact(report.total)})`;
  el.appendChild(caption);

  const table = document.createElement("table");
  table.className = "confusion";
  const head = table.insertRow();
  head.insertCell().textContent = "truth \\ predicted";
  for (const label of report.class_labels) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  report.class_labels.forEach((truth, i) => {
    const row = table.insertRow();
    const th = document.createElement("th");
    th.textContent = truth;
    row.appendChild(th);
    report.class_labels.forEach((predicted, j) => {
      const cell = row.insertCell();
      cell.textContent = exact(report.confusion[i][j]);
      cell.dataset.truth = truth;
      cell.dataset.predicted = predicted;
      cell.className = "confusion-cell";
      if (truth === predicted) {
        cell.classList.add("diagonal");
      }
      if (selected && selected.truth === truth && selected.predicted === predicted) {
        cell.classList.add("selected");
      }
      cell.addEventListener("click", () => onCell(truth, predicted));
    });
  });
  el.appendChild(table);

  const perClass = document.createElement("dl");
  perClass.className = "per-class";
  for (const label of report.class_labels) {
    if (!(label in report.per_class_accuracy)) {
      continue;
    }
    const dt = document.createElement("dt");
    dt.textContent = label;
    const dd = document.createElement("dd");
    dd.dataset.classLabel = label;
    dd.textContent = exact(report.per_class_accuracy[label]);
    perClass.append(dt, dd);
  }
  el.appendChild(perClass);
}
