// Session state and its pure transitions. Values are clamped to schema
// ranges on the way in, so the UI can never submit an out-of-range vector;
// any change to the inputs or query parameters clears results computed
// from the previous inputs.

import type {
  CounterfactualSetResponse,
  FeatureSpec,
  ImportanceReport,
  PredictResponse,
  Schema,
} from './types.js';

export interface QueryParams {
  k: number;
  lambda1: number;
  lambda2: number;
  seed: number;
}

export interface SessionState {
  schema: Schema | null;
  values: number[];
  immutable: string[];
  prediction: PredictResponse | null;
  cfs: CounterfactualSetResponse | null;
  importance: ImportanceReport | null;
  params: QueryParams;
  warning: string | null;
  error: string | null;
  busy: boolean;
}

export function initialState(): SessionState {
  return {
    schema: null,
    values: [],
    immutable: [],
    prediction: null,
    cfs: null,
    importance: null,
    params: { k: 3, lambda1: 0.5, lambda2: 1.0, seed: 0 },
    warning: null,
    error: null,
    busy: false,
  };
}

export function withSchema(state: SessionState, schema: Schema): SessionState {
  return {
    ...state,
    schema,
    values: schema.features.map(lowerBound),
    immutable: [],
    prediction: null,
    cfs: null,
    importance: null,
  };
}

function lowerBound(spec: FeatureSpec): number {
  return spec.kind === 'ordinal' ? 0 : (spec.min ?? 0);
}

export function clampValue(spec: FeatureSpec, raw: number): number {
  if (Number.isNaN(raw)) return lowerBound(spec);
  if (spec.kind === 'ordinal') {
    const max = spec.max_level ?? 0;
    return Math.min(max, Math.max(0, Math.round(raw)));
  }
  return Math.min(spec.max ?? raw, Math.max(spec.min ?? raw, raw));
}

/** Set one item's value; out-of-range input clamps and leaves a warning. */
export function setValue(state: SessionState, index: number, raw: number): SessionState {
  const schema = state.schema;
  if (!schema) return state;
  const spec = schema.features[index];
  if (!spec) return state;
  const clamped = clampValue(spec, raw);
  const values = state.values.slice();
  values[index] = clamped;
  return {
    ...clearResults(state, { keepPrediction: false }),
    values,
    warning: clamped === raw ? null : `${spec.name} clamped to ${clamped}`,
  };
}

export function toggleImmutable(state: SessionState, feature: string): SessionState {
  const has = state.immutable.includes(feature);
  const immutable = has
    ? state.immutable.filter((f) => f !== feature)
    : [...state.immutable, feature].sort();
  // prediction only depends on the values, so it survives a toggle
  return { ...clearResults(state, { keepPrediction: true }), immutable };
}

export function setParam(state: SessionState, key: keyof QueryParams, value: number): SessionState {
  if (Number.isNaN(value)) return state;
  const params = { ...state.params, [key]: value };
  return { ...clearResults(state, { keepPrediction: true }), params };
}

/** "New draw": advance the seed so the next explain samples differently. */
export function advanceSeed(state: SessionState): SessionState {
  return setParam(state, 'seed', state.params.seed + 1);
}

export function applyPrediction(state: SessionState, prediction: PredictResponse): SessionState {
  return { ...state, prediction, error: null };
}

export function applyExplainResults(
  state: SessionState,
  cfs: CounterfactualSetResponse,
  importance: ImportanceReport,
): SessionState {
  return { ...state, cfs, importance, error: null, busy: false };
}

export function applyError(state: SessionState, message: string): SessionState {
  return { ...state, error: message, busy: false };
}

function clearResults(state: SessionState, opts: { keepPrediction: boolean }): SessionState {
  return {
    ...state,
    prediction: opts.keepPrediction ? state.prediction : null,
    cfs: null,
    importance: null,
    warning: null,
    error: null,
  };
}

/** The class the explain request asks for: the opposite of the prediction. */
export function targetClass(state: SessionState): 0 | 1 | null {
  if (!state.prediction) return null;
  return state.prediction.class === 1 ? 0 : 1;
}
