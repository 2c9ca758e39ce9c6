// Shapes of the acquisition-service API bodies the console consumes.

export interface FeatureMeta {
  index: number;
  name: string;
  kind: "real" | "binary";
  cost: number;
  raw_lower: number;
  raw_upper: number;
  baseline: number;
}

export interface SchemaSummary {
  feature_count: number;
  class_names: string[];
  features: FeatureMeta[];
}

export interface Suggestion {
  feature_index: number;
  feature_name: string;
  cost: number;
  score: number;
}

export interface HistoryEntry {
  step: number;
  feature_index: number;
  feature_name: string;
  value: number;
  cost: number;
  accumulated_cost: number;
  score: number | null;
  posterior: number[];
  predicted_class: number;
}

export interface SessionState {
  session_id: string;
  dataset_tag: string;
  status: "active" | "complete" | "budget_exhausted";
  policy: string;
  budget: number | null;
  accumulated_cost: number;
  remaining_budget: number | null;
  step: number;
  posterior: number[];
  predicted_class: number;
  class_names: string[];
  step0_posterior: number[];
  history: HistoryEntry[];
  stop_reason?: string;
}

export interface CreateSessionResponse extends SessionState {
  schema: SchemaSummary;
  suggestion: Suggestion | null;
}

export interface SubmitResponse {
  step: number;
  posterior: number[];
  predicted_class: number;
  accumulated_cost: number;
  remaining_budget: number | null;
  status: SessionState["status"];
  next_suggestion: Suggestion | null;
  stop_reason?: string;
}

export interface ModelInfo {
  model_tag: string;
  dataset_tag: string;
  kind: string;
  feature_count: number;
  class_count: number;
}

export interface TrajectoryRecord {
  step: number;
  feature: number | null;
  feature_name: string | null;
  cost: number;
  accumulated_cost: number;
  score: number | null;
  posterior: number[] | null;
  predicted_class: number;
}
