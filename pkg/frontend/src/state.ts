// The view model and its pure helpers. Nothing in here talks to the
// network or recomputes scores: every displayed number comes straight out
// of an API response.

import type {
  AnnotationSnapshot,
  CorrectedReport,
  EvaluationReport,
  RevisionInfo,
  VideoReport,
} from "./api.js";

export interface EditorBuffer {
  text: string;
  weight: number;
  kind: string;
}

export interface SelectedCell {
  truth: string;
  predicted: string;
}

export interface ViewModel {
  revision: number | null;
  split: string;
  report: EvaluationReport | null;
  corrected: CorrectedReport | null;
  correctionFactor: number;
  annotations: AnnotationSnapshot | null;
  draft: AnnotationSnapshot | null;
  editorClass: string | null;
  buffer: EditorBuffer;
  selectedCell: SelectedCell | null;
  selectedVideo: string | null;
  history: RevisionInfo[];
  error: string | null;
  conflict: boolean;
}

export function emptyViewModel(): ViewModel {
  return {
    revision: null,
    split: "all",
    report: null,
    corrected: null,
    correctionFactor: 1.0,
    annotations: null,
    draft: null,
    editorClass: null,
    buffer: { text: "", weight: 1, kind: "long-sentence" },
    selectedCell: null,
    selectedVideo: null,
    history: [],
    error: null,
    conflict: false,
  };
}

// Editor buffer rules: nonempty text, nonzero finite weight.
export function validateBuffer(buffer: EditorBuffer): string[] {
  const problems: string[] = [];
  if (buffer.text.trim() === "") {
    problems.push("feature text must not be empty");
  }
  if (!Number.isFinite(buffer.weight) || buffer.weight === 0) {
    problems.push("weight must be a nonzero number");
  }
  return problems;
}

export function validateSnapshot(snapshot: AnnotationSnapshot): string[] {
  const problems: string[] = [];
  for (const [label, features] of Object.entries(snapshot.classes)) {
    for (const f of features) {
      if (f.text.trim() === "") {
        problems.push(`${label}: feature with empty text`);
      }
      if (!Number.isFinite(f.weight) || f.weight === 0) {
        problems.push(`${label}: feature ${JSON.stringify(f.text)} has invalid weight`);
      }
    }
  }
  return problems;
}

export function cloneSnapshot(snapshot: AnnotationSnapshot): AnnotationSnapshot {
  return JSON.parse(JSON.stringify(snapshot)) as AnnotationSnapshot;
}

export function snapshotsEqual(a: AnnotationSnapshot, b: AnnotationSnapshot): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

export function videosInCell(
  report: EvaluationReport,
  truth: string,
  predicted: string,
): VideoReport[] {
  return report.videos.filter(
    (v) => v.true_class === truth && v.predicted_class === predicted,
  );
}

// Exact rendering of an API-reported number: JSON round-trip, never
// arithmetic. Integer counts come out byte-identical to the wire form.
export function exact(value: number): string {
  return JSON.stringify(value);
}
