// Controller: wires the API client to the views. All state changes flow
// through here; the only write the UI ever performs is PUT
// /v1/annotations, everything else is re-fetched and re-rendered, so a
// page refresh always reconstructs the same picture from the API.

import { WorkbenchClient, WorkbenchError } from "./api.js";
import {
  cloneSnapshot,
  emptyViewModel,
  validateBuffer,
  type EditorBuffer,
  type ViewModel,
} from "./state.js";
import { renderBreakdown } from "./views/breakdown.js";
import { renderConfusion } from "./views/confusion.js";
import { addBufferToDraft, renderEditor, type EditorHandlers } from "./views/editor.js";
import { renderCorrection } from "./views/correction.js";
import { renderDiff, renderHistory } from "./views/revisions.js";

export interface Panels {
  status: HTMLElement;
  error: HTMLElement;
  confusion: HTMLElement;
  breakdown: HTMLElement;
  editor: HTMLElement;
  correction: HTMLElement;
  history: HTMLElement;
  diff: HTMLElement;
  splitSelect: HTMLSelectElement;
}

export class Controller {
  vm: ViewModel = emptyViewModel();
  pending: Promise<void> = Promise.resolve();
  baselineRef: string | undefined;
  private splits: string[] = [];

  constructor(
    private client: WorkbenchClient,
    private panels: Panels,
  ) {}

  track(op: Promise<void>): Promise<void> {
    this.pending = op.catch((err) => this.surface(err));
    return this.pending;
  }

  private surface(err: unknown): void {
    if (err instanceof WorkbenchError && err.isRevisionConflict) {
      this.vm.conflict = true;
    } else if (err instanceof WorkbenchError) {
      this.vm.error = `${err.code}: ${err.message}`;
    } else {
      this.vm.error = String(err);
    }
    this.renderAll();
  }

  async init(): Promise<void> {
    const project = await this.client.getProject();
    this.splits = ["all", ...project.splits];
    const config = project.config as { lambda?: number; baseline_ref?: string };
    if (typeof config.lambda === "number") {
      this.vm.correctionFactor = config.lambda;
    }
    this.baselineRef = config.baseline_ref;
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const annotations = await this.client.getAnnotations();
    this.vm.revision = annotations.revision;
    this.vm.annotations = annotations.annotations;
    this.vm.draft = cloneSnapshot(annotations.annotations);
    if (this.vm.editorClass === null) {
      this.vm.editorClass = Object.keys(annotations.annotations.classes).sort()[0] ?? null;
    }
    this.vm.report = await this.client.evaluate(this.vm.split);
    this.vm.history = (await this.client.revisions()).revisions;
    this.vm.conflict = false;
    this.vm.error = null;
    this.renderAll();
  }

  renderAll(): void {
    const vm = this.vm;
    this.panels.status.textContent =
      vm.revision === null ? "loading" : `active revision ${vm.revision}`;
    this.panels.error.textContent = vm.error ?? "";
    this.panels.error.hidden = vm.error === null;

    this.panels.splitSelect.textContent = "";
    for (const split of this.splits.length ? this.splits : ["all"]) {
      const option = document.createElement("option");
      option.value = split;
      option.textContent = split;
      option.selected = split === vm.split;
      this.panels.splitSelect.appendChild(option);
    }

    renderConfusion(this.panels.confusion, vm.report, vm.selectedCell, (truth, predicted) =>
      this.selectCell(truth, predicted),
    );
    renderBreakdown(
      this.panels.breakdown,
      vm.report,
      vm.selectedCell,
      vm.selectedVideo,
      (videoId) => this.selectVideo(videoId),
    );
    renderEditor(this.panels.editor, vm, this.editorHandlers());
    renderCorrection(
      this.panels.correction,
      vm.corrected,
      vm.correctionFactor,
      this.baselineRef !== undefined,
      (factor) => void this.track(this.runCorrection(factor)),
    );
    renderHistory(this.panels.history, vm.history, vm.revision, (a, b) =>
      void this.track(this.showDiff(a, b)),
    );
  }

  selectCell(truth: string, predicted: string): void {
    this.vm.selectedCell = { truth, predicted };
    this.vm.selectedVideo = null;
    this.renderAll();
  }

  selectVideo(videoId: string): void {
    this.vm.selectedVideo = videoId;
    this.renderAll();
  }

  setSplit(split: string): Promise<void> {
    this.vm.split = split;
    this.vm.selectedCell = null;
    this.vm.selectedVideo = null;
    return this.track(this.refresh());
  }

  private editorHandlers(): EditorHandlers {
    return {
      onSelectClass: (label) => {
        this.vm.editorClass = label;
        this.renderAll();
      },
      onBufferChange: (buffer: EditorBuffer) => {
        this.vm.buffer = buffer;
        this.renderAll();
      },
      onAddFeature: () => {
        if (!this.vm.draft || !this.vm.editorClass) {
          return;
        }
        if (validateBuffer(this.vm.buffer).length > 0) {
          return;
        }
        this.vm.draft = addBufferToDraft(this.vm.draft, this.vm.editorClass, this.vm.buffer);
        this.vm.buffer = { text: "", weight: 1, kind: "long-sentence" };
        this.renderAll();
      },
      onWeightChange: (label, index, weight) => {
        if (this.vm.draft?.classes[label]?.[index]) {
          this.vm.draft.classes[label][index].weight = weight;
          this.renderAll();
        }
      },
      onRemoveFeature: (label, index) => {
        if (this.vm.draft?.classes[label]) {
          this.vm.draft.classes[label].splice(index, 1);
          this.renderAll();
        }
      },
      onCommit: (note) => void this.track(this.commitDraft(note)),
      onDiscard: () => void this.track(this.refresh()),
    };
  }

  async commitDraft(note: string): Promise<void> {
    if (!this.vm.draft || this.vm.revision === null) {
      return;
    }
    await this.client.putAnnotations(this.vm.draft, note, this.vm.revision);
    // committing succeeded: reload everything under the new revision and
    // re-evaluate immediately
    await this.refresh();
  }

  async runCorrection(factor: number): Promise<void> {
    this.vm.correctionFactor = factor;
    this.vm.corrected = await this.client.correct(factor, this.baselineRef, this.vm.split);
    this.renderAll();
  }

  async showDiff(revA: number, revB: number): Promise<void> {
    const result = await this.client.diff(revA, revB);
    renderDiff(this.panels.diff, revA, revB, result.changes);
  }
}

export function mount(root: Document, baseUrl: string = ""): Controller {
  const get = (id: string) => {
    const el = root.getElementById(id);
    if (!el) {
      throw new Error(`missing #${id}`);
    }
    return el as HTMLElement;
  };
  const panels: Panels = {
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
  const controller = new Controller(new WorkbenchClient(baseUrl), panels);
  panels.splitSelect.addEventListener("change", () =>
    void controller.setSplit(panels.splitSelect.value),
  );
  void controller.track(controller.init());
  return controller;
}

declare global {
  interface Window {
    vtmmController?: Controller;
  }
}

if (typeof document !== "undefined" && document.getElementById("confusion")) {
  window.vtmmController = mount(document);
}
