import assert from 'node:assert/strict';
import test from 'node:test';

import {
  advanceSeed,
  applyExplainResults,
  applyPrediction,
  clampValue,
  initialState,
  setParam,
  setValue,
  targetClass,
  toggleImmutable,
  withSchema,
} from '../src/state.js';
import { testSchema } from './stub_server.js';
import type { CounterfactualSetResponse, ImportanceReport } from '../src/types.js';

const schema = testSchema();

function loadedState() {
  return withSchema(initialState(), schema);
}

const fakeCfs: CounterfactualSetResponse = {
  query: {},
  cfs: [],
  objective_value: 0,
  evaluations_used: 0,
  partial: false,
  seed: 0,
};
const fakeImportance: ImportanceReport = {
  scope: 'local',
  scores: {},
  k_per_instance: 3,
  instances_covered: 1,
  failures: 0,
};

test('schema load initializes one value per feature', () => {
  const s = loadedState();
  assert.equal(s.values.length, 17);
  assert.ok(s.values.every((v) => v === 0));
});

test('clamp rejects values outside the schema range', () => {
  const spec = schema.features[0]!; // 0..4
  assert.equal(clampValue(spec, 99), 4);
  assert.equal(clampValue(spec, -3), 0);
  assert.equal(clampValue(spec, 2.4), 2);
  assert.equal(clampValue(spec, Number.NaN), 0);
});

test('out-of-range entry is clamped and leaves a warning', () => {
  const s = setValue(loadedState(), 2, 99); // ham03 tops out at 4
  assert.equal(s.values[2], 4);
  assert.match(s.warning ?? '', /ham03/);
});

test('in-range entry leaves no warning', () => {
  const s = setValue(loadedState(), 2, 3);
  assert.equal(s.values[2], 3);
  assert.equal(s.warning, null);
});

test('value change clears prediction and explain results', () => {
  let s = applyPrediction(loadedState(), { class: 0, probability: 0.3 });
  s = applyExplainResults(s, fakeCfs, fakeImportance);
  s = setValue(s, 0, 1);
  assert.equal(s.prediction, null);
  assert.equal(s.cfs, null);
  assert.equal(s.importance, null);
});

test('immutable toggle adds then removes, clearing stale explain results', () => {
  let s = applyPrediction(loadedState(), { class: 0, probability: 0.3 });
  s = applyExplainResults(s, fakeCfs, fakeImportance);
  s = toggleImmutable(s, 'ham10');
  assert.deepEqual(s.immutable, ['ham10']);
  assert.equal(s.cfs, null);
  assert.notEqual(s.prediction, null); // prediction only depends on values
  s = toggleImmutable(s, 'ham10');
  assert.deepEqual(s.immutable, []);
});

test('param change clears explain results but keeps prediction', () => {
  let s = applyPrediction(loadedState(), { class: 1, probability: 0.8 });
  s = applyExplainResults(s, fakeCfs, fakeImportance);
  s = setParam(s, 'k', 5);
  assert.equal(s.params.k, 5);
  assert.equal(s.cfs, null);
  assert.notEqual(s.prediction, null);
});

test('new draw advances the seed by one', () => {
  let s = loadedState();
  assert.equal(s.params.seed, 0);
  s = advanceSeed(s);
  assert.equal(s.params.seed, 1);
});

test('target class is the opposite of the prediction', () => {
  let s = loadedState();
  assert.equal(targetClass(s), null);
  s = applyPrediction(s, { class: 0, probability: 0.2 });
  assert.equal(targetClass(s), 1);
  s = applyPrediction(s, { class: 1, probability: 0.9 });
  assert.equal(targetClass(s), 0);
});
