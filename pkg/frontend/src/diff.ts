// View model for the per-counterfactual change rows. Every number shown
// comes straight from the server's diff payload: the arrow direction is the
// sign of `delta` and the magnitude is |delta|, never recomputed locally.

import type { CounterfactualSetResponse, DiffEntry } from './types.js';

export interface DiffRow {
  feature: string;
  old: number;
  next: number;
  delta: number;
  direction: 'increase' | 'decrease';
  arrow: '→' | '←';
  magnitude: number;
}

export interface CfView {
  index: number;
  probability: number;
  distance: number;
  rows: DiffRow[];
}

export function toDiffRow(entry: DiffEntry): DiffRow {
  const increase = entry.delta > 0;
  return {
    feature: entry.feature,
    old: entry.old,
    next: entry.new,
    delta: entry.delta,
    direction: increase ? 'increase' : 'decrease',
    arrow: increase ? '→' : '←',
    magnitude: Math.abs(entry.delta),
  };
}

export function buildCfViews(set: CounterfactualSetResponse): CfView[] {
  return set.cfs.map((cf, index) => ({
    index,
    probability: cf.predicted_probability,
    distance: cf.distance_to_origin,
    rows: cf.diff.map(toDiffRow),
  }));
}
