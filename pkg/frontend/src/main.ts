// DOM wiring: the only module that touches document/window. All state
// transitions and HTML generation live in the pure modules.

import { ApiClient, ApiError, isAbort } from './api.js';
import {
  advanceSeed,
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
} from './state.js';
import {
  renderControls,
  renderDiffs,
  renderForm,
  renderImportance,
  renderPrediction,
  renderWarning,
} from './render.js';

// same-origin by default; ?api=http://host:port points elsewhere
const apiBase = new URLSearchParams(window.location.search).get('api') ?? '';
const api = new ApiClient(apiBase);
let state: SessionState = initialState();

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function update(next: SessionState): void {
  state = next;
  redraw();
}

function redraw(): void {
  byId('form').innerHTML = renderForm(state) + renderWarning(state);
  byId('controls').innerHTML = renderControls(state);
  byId('prediction').innerHTML = renderPrediction(state);
  byId('diffs').innerHTML = renderDiffs(state);
  byId('importance').innerHTML = renderImportance(state);
  bind();
}

function bind(): void {
  document.querySelectorAll<HTMLInputElement>('.item-value').forEach((input) => {
    input.addEventListener('change', () => {
      update(setValue(state, Number(input.dataset.index), Number(input.value)));
    });
  });
  document.querySelectorAll<HTMLInputElement>('.item-pin').forEach((box) => {
    box.addEventListener('change', () => {
      update(toggleImmutable(state, box.dataset.feature ?? ''));
    });
  });
  for (const key of ['k', 'lambda1', 'lambda2', 'seed'] as const) {
    const input = document.getElementById(`param-${key}`) as HTMLInputElement | null;
    input?.addEventListener('change', () => {
      update(setParam(state, key, Number(input.value)));
    });
  }
  byId('btn-predict').addEventListener('click', () => void predict());
  byId('btn-explain').addEventListener('click', () => void explain());
  byId('btn-regenerate').addEventListener('click', () => void explain());
  byId('btn-new-draw').addEventListener('click', () => {
    update(advanceSeed(state));
    void explain();
  });
}

async function predict(): Promise<void> {
  try {
    const res = await api.predict(state.values);
    update(applyPrediction(state, res));
  } catch (e) {
    update(applyError(state, describeError(e)));
  }
}

async function explain(): Promise<void> {
  const target = targetClass(state);
  if (target === null) return;
  update({ ...state, busy: true });
  try {
    const { cfs, importance } = await api.explain({
      values: state.values,
      target_class: target,
      k: state.params.k,
      immutable: state.immutable,
      lambda1: state.params.lambda1,
      lambda2: state.params.lambda2,
      seed: state.params.seed,
    });
    update(applyExplainResults(state, cfs, importance));
  } catch (e) {
    if (isAbort(e)) return; // a newer request superseded this one
    update(applyError(state, describeError(e)));
  }
}

function describeError(e: unknown): string {
  if (e instanceof ApiError) {
    return `${e.kind}: ${e.detail}`;
  }
  return e instanceof Error ? e.message : String(e);
}

async function boot(): Promise<void> {
  try {
    const schema = await api.fetchSchema();
    update(withSchema(state, schema));
  } catch (e) {
    byId('form').innerHTML = `
      <div class="banner-error">
        <p>could not load the schema from the service: ${describeError(e)}</p>
        <button id="btn-retry">retry</button>
      </div>`;
    byId('btn-retry').addEventListener('click', () => void boot());
  }
}

void boot();
