// Scripted browser round-trip against the real backend (spawned by the
// global setup): drive the DOM like a user would, and check that every
// rendered number is byte-equal to what the API reports directly.

import { beforeAll, describe, expect, inject, it } from "vitest";

import { WorkbenchClient } from "../src/api.js";
import { Controller, type Panels } from "../src/main.js";
import { exact } from "../src/state.js";

const apiUrl = inject("apiUrl");

// The project starts with both classes sharing class00's prototype
// sentence, so class01 drains into class00. Committing class01's own
// prototype through the editor must empty that confusion cell. (With a
// precomputed sentence-vector table, edits must reference exported texts.)
const DISCRIMINATIVE_TEXT = "defining description of class01";

function buildPanels(): Panels {
  document.body.innerHTML = `
    <span id="status"></span>
    <select id="split-select"></select>
    <div id="error" hidden></div>
    <div id="confusion"></div>
    <div id="breakdown"></div>
    <div id="editor"></div>
    <div id="correction"></div>
    <div id="history"></div>
    <div id="diff"></div>
  `;
  const get = (id: string) => document.getElementById(id) as HTMLElement;
  return {
    status: get("status"),
    error: get("error"),
    confusion: get("confusion"),
    breakdown: get("breakdown"),
    editor: get("editor"),
    correction: get("correction"),
    history: get("history"),
    diff: get("diff"),
    splitSelect: get("split-select") as HTMLSelectElement,
  };
}

async function directEvaluate(split = "all") {
  const resp = await fetch(`${apiUrl}/v1/evaluate`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ split }),
  });
  expect(resp.ok).toBe(true);
  return resp.json();
}

function renderedConfusion(panel: HTMLElement): Map<string, string> {
  const cells = panel.querySelectorAll<HTMLElement>(".confusion-cell");
  const out = new Map<string, string>();
  for (const cell of cells) {
    out.set(`${cell.dataset.truth}->${cell.dataset.predicted}`, cell.textContent ?? "");
  }
  return out;
}

function expectConfusionMatchesApi(panel: HTMLElement, report: {
  class_labels: string[];
  confusion: number[][];
  revision: number;
}): void {
  const rendered = renderedConfusion(panel);
  expect(rendered.size).toBe(report.class_labels.length ** 2);
  report.class_labels.forEach((truth, i) => {
    report.class_labels.forEach((predicted, j) => {
      expect(rendered.get(`${truth}->${predicted}`)).toBe(exact(report.confusion[i][j]));
    });
  });
  const caption = panel.querySelector<HTMLElement>("[data-role=confusion-caption]");
  expect(caption?.textContent).toContain(`revision ${report.revision}`);
}

describe("workbench UI against the live backend", () => {
  let panels: Panels;
  let controller: Controller;

  beforeAll(async () => {
    panels = buildPanels();
    controller = new Controller(new WorkbenchClient(apiUrl), panels);
    await controller.track(controller.init());
    expect(controller.vm.error).toBeNull();
  });

  it("initial render matches a direct API evaluation byte for byte", async () => {
    const direct = await directEvaluate();
    expectConfusionMatchesApi(panels.confusion, direct);
    expect(panels.status.textContent).toBe(`active revision ${direct.revision}`);
  });

  it("cell click shows that cell's videos; video click shows exact degrees", async () => {
    const direct = await directEvaluate();
    // pick any nonempty cell
    let truth = "", predicted = "";
    outer: for (let i = 0; i < direct.class_labels.length; i++) {
      for (let j = 0; j < direct.class_labels.length; j++) {
        if (direct.confusion[i][j] > 0) {
          truth = direct.class_labels[i];
          predicted = direct.class_labels[j];
          break outer;
        }
      }
    }
    panels.confusion
      .querySelector<HTMLElement>(`[data-truth=${truth}][data-predicted=${predicted}]`)!
      .click();
    const buttons = panels.breakdown.querySelectorAll<HTMLElement>("[data-video-id]");
    const expected = direct.videos.filter(
      (v: { true_class: string; predicted_class: string }) =>
        v.true_class === truth && v.predicted_class === predicted,
    );
    expect(buttons.length).toBe(expected.length);

    buttons[0].click();
    const video = expected.find(
      (v: { video_id: string }) => v.video_id === buttons[0].dataset.videoId,
    )!;
    const detail = panels.breakdown.querySelector<HTMLElement>("[data-role=video-detail]")!;
    for (const breakdown of video.ranking) {
      const rendered = detail.querySelector<HTMLElement>(
        `[data-combined-of=${breakdown.class_label}]`,
      )!;
      expect(rendered.textContent).toBe(exact(breakdown.combined_score));
      for (const feature of breakdown.features) {
        const cell = Array.from(
          detail.querySelectorAll<HTMLElement>("[data-degree-of]"),
        ).find((c) => c.dataset.degreeOf === `${breakdown.class_label}:${feature.text}`)!;
        expect(cell.textContent).toBe(exact(feature.degree));
      }
    }
  });

  it("committing a discriminative feature increments the revision, " +
     "re-renders byte-equal to a fresh direct evaluation, and shrinks " +
     "the confusion cell", async () => {
    const before = controller.vm.revision!;
    const beforeReport = await directEvaluate();
    const i = beforeReport.class_labels.indexOf("class01");
    const j = beforeReport.class_labels.indexOf("class00");
    const drained = beforeReport.confusion[i][j];
    const rowTotal = beforeReport.confusion[i].reduce((a: number, b: number) => a + b, 0);
    expect(drained).toBeGreaterThan(0.3 * rowTotal); // confusable setup held

    // drive the editor DOM: pick the confused class, type its own
    // prototype sentence, add it, commit
    const select = panels.editor.querySelector<HTMLSelectElement>("[data-role=class-select]")!;
    select.value = "class01";
    select.dispatchEvent(new Event("change"));

    const text = panels.editor.querySelector<HTMLInputElement>("[data-role=buffer-text]")!;
    text.value = DISCRIMINATIVE_TEXT;
    text.dispatchEvent(new Event("input"));

    const add = panels.editor.querySelector<HTMLButtonElement>("[data-role=add-feature]")!;
    expect(add.disabled).toBe(false);
    add.click();

    const commit = panels.editor.querySelector<HTMLButtonElement>("[data-role=commit]")!;
    expect(commit.disabled).toBe(false);
    commit.click();
    await controller.pending;

    expect(controller.vm.error).toBeNull();
    expect(controller.vm.revision).toBe(before + 1);
    expect(panels.status.textContent).toBe(`active revision ${before + 1}`);

    const direct = await directEvaluate();
    expect(direct.revision).toBe(before + 1);
    expectConfusionMatchesApi(panels.confusion, direct);

    // the committed feature repaired the confusion, with no retraining
    expect(direct.confusion[i][j]).toBeLessThan(drained);
    expect(direct.per_class_accuracy.class01).toBeGreaterThan(
      beforeReport.per_class_accuracy.class01,
    );
    const cell = panels.confusion.querySelector<HTMLElement>(
      "[data-truth=class01][data-predicted=class00]",
    )!;
    expect(cell.textContent).toBe(exact(direct.confusion[i][j]));
  });

  it("revision history lists the commit and its diff names the added feature", async () => {
    await controller.track(controller.refresh());
    const active = controller.vm.revision!;
    const item = panels.history.querySelector<HTMLElement>(`[data-revision="${active}"]`)!;
    item.querySelector<HTMLButtonElement>(`[data-role=diff-${active}]`)!.click();
    await controller.pending;
    expect(panels.diff.textContent).toContain(DISCRIMINATIVE_TEXT);
    expect(panels.diff.textContent).toContain("class01");
  });

  it("λ slider at 0 renders the baseline exactly", async () => {
    const slider = panels.correction.querySelector<HTMLInputElement>(
      "[data-role=lambda-slider]",
    )!;
    slider.value = "0";
    slider.dispatchEvent(new Event("change"));
    await controller.pending;
    expect(controller.vm.error).toBeNull();

    const baseline = panels.correction.querySelector<HTMLElement>(
      "[data-role=baseline-confusion]",
    )!;
    const corrected = panels.correction.querySelector<HTMLElement>(
      "[data-role=corrected-confusion]",
    )!;
    const snapshot = (root: HTMLElement) =>
      Array.from(root.querySelectorAll<HTMLElement>("td[data-truth]")).map(
        (c) => `${c.dataset.truth}->${c.dataset.predicted}=${c.textContent}`,
      );
    expect(snapshot(corrected)).toEqual(snapshot(baseline));

    const caption = panels.correction.querySelector<HTMLElement>(
      "[data-role=correction-caption]",
    )!;
    expect(caption.textContent).toContain("λ 0");
    // corrected accuracy must equal baseline accuracy in the caption too
    const report = controller.vm.corrected!;
    expect(report.accuracy).toBe(report.baseline_accuracy);
    report.videos.forEach((v) => {
      expect(v.corrected_predicted).toBe(v.baseline_predicted);
    });
  });

  it("a stale commit surfaces the 409 retry prompt and reload recovers", async () => {
    // make the draft dirty through the DOM
    const weightInput = panels.editor.querySelector<HTMLInputElement>("[data-role=weight-0]")!;
    weightInput.value = "3";
    weightInput.dispatchEvent(new Event("change"));

    const genuine = controller.vm.revision!;
    controller.vm.revision = 0; // stale parent
    const commit = panels.editor.querySelector<HTMLButtonElement>("[data-role=commit]")!;
    expect(commit.disabled).toBe(false);
    commit.click();
    await controller.pending;

    expect(controller.vm.conflict).toBe(true);
    const prompt = panels.editor.querySelector<HTMLElement>("[data-role=conflict]")!;
    expect(prompt.textContent).toContain("newer revision");

    prompt.querySelector<HTMLButtonElement>("[data-role=conflict-reload]")!.click();
    await controller.pending;
    expect(controller.vm.conflict).toBe(false);
    expect(controller.vm.revision).toBe(genuine);
  });
});
