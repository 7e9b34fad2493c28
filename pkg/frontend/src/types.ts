// Wire types for the explanation service API. Shapes mirror the server's
// JSON documents exactly; see the backend README for the route table.

export interface FeatureSpec {
  name: string;
  kind: 'ordinal' | 'continuous';
  max_level?: number;
  min?: number;
  max?: number;
  default_mutable: boolean;
  description?: string;
}

export interface Schema {
  features: FeatureSpec[];
  label_name: string;
  positive_label_meaning: string;
}

export interface PredictResponse {
  class: 0 | 1;
  probability: number;
}

export interface DiffEntry {
  feature: string;
  old: number;
  new: number;
  delta: number;
}

export interface Counterfactual {
  values: number[];
  predicted_probability: number;
  valid: boolean;
  distance_to_origin: number;
  diff: DiffEntry[];
}

export interface CounterfactualSetResponse {
  query: Record<string, unknown>;
  cfs: Counterfactual[];
  objective_value: number;
  evaluations_used: number;
  partial: boolean;
  seed: number;
}

export interface ImportanceReport {
  scope: 'local' | 'global';
  scores: Record<string, number>;
  k_per_instance: number;
  instances_covered: number;
  failures: number;
}

export interface CounterfactualRequest {
  values: number[];
  target_class: 0 | 1;
  k: number;
  immutable: string[];
  lambda1: number;
  lambda2: number;
  seed: number;
}

export interface LocalImportanceRequest {
  values: number[];
  k: number;
  immutable: string[];
  seed: number;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
  field?: string;
}
