// Shapes of the service's JSON payloads. The UI holds no business logic:
// every number on screen comes from one of these responses.

export interface ProjectRecord {
  project_id: string;
  name: string;
  created_at: string;
}

export interface StageFiles {
  metadata: boolean;
  engagement: boolean;
  features: boolean;
  dataset: boolean;
  eda: boolean;
  model: boolean;
  report: boolean;
}

export interface ProjectDetail extends ProjectRecord {
  stages: StageFiles;
}

export interface JobRecord {
  job_id: string;
  project_id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
}

export interface Histogram {
  feature_name: string;
  bin_edges: number[];
  counts: number[];
  n: number;
}

export interface CorrelationResult {
  feature_name: string;
  r: number;
  n: number;
}

export interface LoessCurve {
  feature_name: string;
  span: number;
  degree: number;
  eval_x: number[];
  fitted_y: number[];
}

export interface EdaReport {
  span: number;
  n_complete: number;
  histograms: Histogram[];
  correlations: CorrelationResult[];
  loess_curves: LoessCurve[];
}

export interface ModelMetrics {
  rmse: number;
  r_squared: number;
  n: number;
}

export interface ModelPayload {
  feature_names: string[];
  means: number[];
  stds: number[];
  weights: number[];
  intercept: number;
  metrics: ModelMetrics;
  vif?: (number | null)[];
  training?: { trained_at: string; n_rows: number; cv?: unknown };
}

export interface WhatIfScenario {
  baseline: number[];
  deltas: number[];
  predicted_baseline: number;
  predicted_new: number;
  delta_engagement: number;
}

export interface FeatureInfluence {
  feature_name: string;
  weight: number;
  rank: number;
  direction: "positive" | "negative";
}

export interface Recommendation {
  feature_name: string;
  advice: "decrease" | "increase";
  weight: number;
  caution: boolean;
}

export interface DesignReport {
  influences: FeatureInfluence[];
  scenarios: WhatIfScenario[];
  recommendations: Recommendation[];
  caveats: string[];
}

export interface ValidationIssue {
  video_id: string;
  field: string;
  kind: string;
  message: string;
}

export interface ValidationReport {
  total_rows: number;
  complete_rows: number;
  issues: ValidationIssue[];
}

export interface DatasetView {
  feature_names: string[];
  target_name: string;
  rows: Record<string, string | number | boolean | null>[];
  validation: ValidationReport;
}

export interface ManualVideoIn {
  video_id: string;
  institution_name: string;
  speaker_name: string;
  course_code: string;
  course_name: string;
  unit_level: string;
  year: number;
  video_type: string;
  subject_area: string;
  video_url?: string;
}

export interface ApiErrorBody {
  error: { type: string; message: string; row?: number };
}
