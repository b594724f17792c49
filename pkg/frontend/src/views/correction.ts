// Correction panel: a λ slider re-runs /v1/correct and re-renders both
// the baseline's own confusion and the corrected one side by side. At
// λ=0 the two sides are identical by construction on the server; the UI
// just shows what it was given.

import type { CorrectedReport } from "../api.js";
import { exact } from "../state.js";

export function renderCorrection(
  el: HTMLElement,
  report: CorrectedReport | null,
  factor: number,
  enabled: boolean,
  onFactorChange: (factor: number) => void,
): void {
  el.textContent = "";
  if (!enabled) {
    el.textContent = "no baseline scores configured for this project";
    return;
  }
  const controls = document.createElement("div");
  controls.className = "lambda-controls";
  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = "0";
  slider.max = "2";
  slider.step = "0.05";
  slider.value = String(factor);
  slider.dataset.role = "lambda-slider";
  const value = document.createElement("span");
  value.dataset.role = "lambda-value";
  value.textContent = `λ = ${factor}`;
  slider.addEventListener("change", () => onFactorChange(Number(slider.value)));
  controls.append(slider, value);
  el.appendChild(controls);

  if (!report) {
    const hint = document.createElement("div");
    hint.textContent = "move the slider to run a correction";
    el.appendChild(hint);
    return;
  }

  const caption = document.createElement("div");
  caption.className = "panel-caption";
  caption.dataset.role = "correction-caption";
  caption.textContent =
    `revision ${exact(report.revision)} · λ ${exact(report.correction_factor)} · ` +
    `baseline accuracy ${exact(report.baseline_accuracy)} · ` +
    `corrected accuracy ${exact(report.accuracy)}`;
  el.appendChild(caption);

  const wrap = document.createElement("div");
  wrap.className = "correction-tables";
  wrap.appendChild(
    confusionTable("baseline", report.baseline_class_labels, report.baseline_confusion),
  );
  wrap.appendChild(confusionTable("corrected", report.class_labels, report.confusion));
  el.appendChild(wrap);
}

function confusionTable(role: string, labels: string[], confusion: number[][]): HTMLElement {
  const box = document.createElement("div");
  const title = document.createElement("h4");
  title.textContent = role;
  box.appendChild(title);
  const table = document.createElement("table");
  table.dataset.role = `${role}-confusion`;
  const head = table.insertRow();
  head.insertCell().textContent = "";
  for (const label of labels) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  labels.forEach((truth, i) => {
    const row = table.insertRow();
    const th = document.createElement("th");
    th.textContent = truth;
    row.appendChild(th);
    labels.forEach((predicted, j) => {
      const cell = row.insertCell();
      cell.textContent = exact(confusion[i][j]);
      cell.dataset.truth = truth;
      cell.dataset.predicted = predicted;
    });
  });
  box.appendChild(table);
  return box;
}
