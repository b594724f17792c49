// Typed client for the workbench HTTP API. Every successful response
// carries the active annotation revision id; errors arrive as
// {"error": {code, message, ...}} and are rethrown as WorkbenchError so
// views can surface them (including the 409 revision-conflict case).

export interface CommonFeature {
  text: string;
  weight: number;
}

export interface FeatureAnnotation {
  text: string;
  weight: number;
  kind: string;
}

export interface AnnotationSnapshot {
  common_features: CommonFeature[];
  classes: Record<string, FeatureAnnotation[]>;
}

export interface FeatureDegree extends FeatureAnnotation {
  degree: number;
}

export interface ClassBreakdown {
  class_label: string;
  positive_score: number;
  negative_score: number;
  combined_score: number;
  features: FeatureDegree[];
}

export interface VideoReport {
  video_id: string;
  true_class: string;
  predicted_class: string;
  ranking: ClassBreakdown[];
}

export interface EvaluationReport {
  kind: string;
  revision: number;
  mode: string;
  split: string;
  accuracy: number;
  correct: number;
  total: number;
  class_labels: string[];
  confusion: number[][];
  per_class_accuracy: Record<string, number>;
  videos: VideoReport[];
}

export interface CorrectedClassScore {
  class_label: string;
  baseline_score: number;
  matching_score: number;
  corrected_score: number;
}

export interface CorrectedVideoReport {
  video_id: string;
  true_class: string;
  baseline_predicted: string;
  corrected_predicted: string;
  classes: CorrectedClassScore[];
}

export interface CorrectedReport {
  kind: string;
  revision: number;
  mode: string;
  split: string;
  correction_factor: number;
  normalize_baseline: string;
  accuracy: number;
  correct: number;
  total: number;
  class_labels: string[];
  confusion: number[][];
  per_class_accuracy: Record<string, number>;
  baseline_accuracy: number;
  baseline_class_labels: string[];
  baseline_confusion: number[][];
  baseline_per_class_accuracy: Record<string, number>;
  videos: CorrectedVideoReport[];
}

export interface RevisionInfo {
  revision: number;
  parent: number | null;
  timestamp: string;
  note: string;
}

export interface DiffEntry {
  class_label: string;
  added: FeatureAnnotation[];
  removed: FeatureAnnotation[];
  weight_changes: { text: string; kind: string; from: number; to: number }[];
}

export interface ProjectInfo {
  revision: number;
  config: Record<string, unknown>;
  video_count: number;
  class_count: number;
  splits: string[];
}

export interface ClassInfo {
  label: string;
  feature_count: number;
}

export class WorkbenchError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public revision?: number,
    public diagnostics?: string[],
  ) {
    super(message);
  }

  get isRevisionConflict(): boolean {
    return this.status === 409;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class WorkbenchClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.baseUrl + path, init);
    const payload = await resp.json();
    if (!resp.ok) {
      const err = payload?.error ?? {};
      throw new WorkbenchError(
        resp.status,
        err.code ?? "Unknown",
        err.message ?? `request failed with ${resp.status}`,
        err.revision,
        err.diagnostics,
      );
    }
    return payload as T;
  }

  getProject(): Promise<ProjectInfo> {
    return this.request("GET", "/v1/project");
  }

  getClasses(): Promise<{ revision: number; classes: ClassInfo[] }> {
    return this.request("GET", "/v1/classes");
  }

  getAnnotations(): Promise<{ revision: number; annotations: AnnotationSnapshot }> {
    return this.request("GET", "/v1/annotations");
  }

  putAnnotations(
    annotations: AnnotationSnapshot,
    note: string,
    parentRevision: number,
  ): Promise<{ revision: number; parent: number }> {
    return this.request("PUT", "/v1/annotations", {
      annotations,
      note,
      parent_revision: parentRevision,
    });
  }

  score(videoId: string, classLabel?: string): Promise<{
    revision: number;
    video_id: string;
    scores: ClassBreakdown[];
  }> {
    const body: Record<string, unknown> = { video_id: videoId };
    if (classLabel !== undefined) {
      body["class"] = classLabel;
    }
    return this.request("POST", "/v1/score", body);
  }

  evaluate(split: string = "all"): Promise<EvaluationReport> {
    return this.request("POST", "/v1/evaluate", { split });
  }

  correct(
    factor: number,
    baselineRef?: string,
    split: string = "all",
  ): Promise<CorrectedReport> {
    const body: Record<string, unknown> = { lambda: factor, split };
    if (baselineRef !== undefined) {
      body.baseline_ref = baselineRef;
    }
    return this.request("POST", "/v1/correct", body);
  }

  revisions(): Promise<{ revision: number; revisions: RevisionInfo[] }> {
    return this.request("GET", "/v1/revisions");
  }

  diff(revA: number, revB: number): Promise<{
    revision: number;
    rev_a: number;
    rev_b: number;
    changes: DiffEntry[];
  }> {
    return this.request("GET", `/v1/revisions/${revA}/diff/${revB}`);
  }
}
