// Full client round trip against a stub of the documented HTTP API:
// form entry -> predict -> explain -> rendered diff rows and importance
// chart, including the immutability, determinism and failure paths.

import assert from 'node:assert/strict';
import test from 'node:test';

import { ApiClient, ApiError, isAbort } from '../src/api.js';
import {
  applyError,
  applyExplainResults,
  applyPrediction,
  initialState,
  setParam,
  setValue,
  targetClass,
  toggleImmutable,
  withSchema,
  type SessionState,
} from '../src/state.js';
import { renderDiffs, renderForm, renderImportance, renderWarning } from '../src/render.js';
import { startStub } from './stub_server.js';

const VECTOR = [4, 1, 0, 2, 1, 0, 3, 2, 4, 2, 1, 0, 2, 1, 0, 1, 0];

async function explainInto(
  state: SessionState,
  api: ApiClient,
): Promise<SessionState> {
  const target = targetClass(state);
  assert.notEqual(target, null);
  const { cfs, importance } = await api.explain({
    values: state.values,
    target_class: target!,
    k: state.params.k,
    immutable: state.immutable,
    lambda1: state.params.lambda1,
    lambda2: state.params.lambda2,
    seed: state.params.seed,
  });
  return applyExplainResults(state, cfs, importance);
}

test('round trip: entry, one immutable item, k=3, render, regenerate', async (t) => {
  const stub = await startStub();
  t.after(() => stub.close());
  const api = new ApiClient(stub.url);

  // schema -> form with 17 bounded controls
  let state = withSchema(initialState(), await api.fetchSchema());
  const form = renderForm(state);
  assert.equal((form.match(/class="item-value"/g) ?? []).length, 17);
  assert.match(form, /aria-label="ham01 score \(0 to 4\)"/);
  assert.match(form, /aria-label="ham04 score \(0 to 2\)"/);

  // enter the full vector, pin ham10, ask for k=3
  VECTOR.forEach((v, i) => {
    state = setValue(state, i, v);
  });
  assert.deepEqual(state.values, VECTOR);
  state = toggleImmutable(state, 'ham10');
  state = setParam(state, 'k', 3);

  state = applyPrediction(state, await api.predict(state.values));
  state = await explainInto(state, api);

  // the request body carried the pinned item
  const cfRequest = stub.requests.find((r) => r.path === '/counterfactuals');
  assert.ok(cfRequest);
  assert.deepEqual(cfRequest!.body.immutable, ['ham10']);
  assert.equal(cfRequest!.body.k, 3);

  // rendered diff rows match the response payload exactly
  const diffsHtml = renderDiffs(state);
  const cards = diffsHtml.match(/class="cf-card"/g) ?? [];
  assert.equal(cards.length, 3);
  for (const cf of state.cfs!.cfs) {
    for (const d of cf.diff) {
      assert.notEqual(d.feature, 'ham10'); // pinned item never changes
      assert.match(diffsHtml, new RegExp(`data-feature="${d.feature}"`));
      const arrow = d.delta > 0 ? '→' : '←';
      assert.ok(diffsHtml.includes(`${arrow} ${Math.abs(d.delta)}`));
    }
  }
  const renderedRows = diffsHtml.match(/class="diff-row"/g) ?? [];
  const payloadRows = state.cfs!.cfs.reduce((n, cf) => n + cf.diff.length, 0);
  assert.equal(renderedRows.length, payloadRows); // only changed items, all of them

  // importance chart mirrors the response scores
  const chart = renderImportance(state);
  assert.equal((chart.match(/<rect /g) ?? []).length, 17);
  assert.match(chart, /data-feature="ham10" data-score="0"/);

  // regenerate with the same seed renders identically
  const again = await explainInto(state, api);
  assert.equal(renderDiffs(again), diffsHtml);
  assert.equal(renderImportance(again), chart);

  // a new draw (seed+1) issues a different request
  state = setParam(state, 'seed', state.params.seed + 1);
  assert.equal(state.cfs, null); // stale results were cleared
  state = applyPrediction(state, await api.predict(state.values));
  state = await explainInto(state, api);
  const last = stub.requests.filter((r) => r.path === '/counterfactuals').at(-1)!;
  assert.equal(last.body.seed, 1);
});

test('all items immutable: 422 is surfaced with the relax hint', async (t) => {
  const stub = await startStub();
  t.after(() => stub.close());
  const api = new ApiClient(stub.url);

  let state = withSchema(initialState(), await api.fetchSchema());
  for (const f of state.schema!.features) {
    state = toggleImmutable(state, f.name);
  }
  state = applyPrediction(state, await api.predict(state.values));
  try {
    state = await explainInto(state, api);
    assert.fail('expected a 422');
  } catch (e) {
    assert.ok(e instanceof ApiError);
    assert.equal(e.status, 422);
    assert.equal(e.kind, 'NoCounterfactualFound');
    state = applyError(state, `${e.kind}: ${e.detail}`);
  }
  const html = renderDiffs(state);
  assert.match(html, /no counterfactual found under these constraints/);
  assert.match(html, /relax the immutability constraints/);
});

test('out-of-range keyboard entry cannot reach the wire', async (t) => {
  const stub = await startStub();
  t.after(() => stub.close());
  const api = new ApiClient(stub.url);

  let state = withSchema(initialState(), await api.fetchSchema());
  state = setValue(state, 2, 99); // ham03 max is 4
  assert.equal(state.values[2], 4);
  assert.match(renderWarning(state), /ham03 clamped to 4/);

  // the clamped vector passes the stub's range validation
  const res = await api.predict(state.values);
  assert.ok(res.probability >= 0 && res.probability <= 1);
});

test('a newer explain supersedes the in-flight one', async (t) => {
  const stub = await startStub({ delayMs: 120 });
  t.after(() => stub.close());
  const api = new ApiClient(stub.url);

  let state = withSchema(initialState(), await api.fetchSchema());
  state = applyPrediction(state, await api.predict(state.values));
  const target = targetClass(state)!;
  const base = {
    values: state.values,
    target_class: target,
    k: 2,
    immutable: [] as string[],
    lambda1: 0.5,
    lambda2: 1.0,
  };
  const first = api.explain({ ...base, seed: 0 });
  const second = api.explain({ ...base, seed: 1 });
  const firstOutcome = await first.then(
    () => 'resolved',
    (e) => (isAbort(e) ? 'aborted' : `failed: ${e}`),
  );
  assert.equal(firstOutcome, 'aborted');
  const result = await second;
  assert.equal(result.cfs.seed, 1);
});
