// HTML renderers. Pure string builders over the session state so the whole
// presentation layer is testable without a browser; main.ts only assigns
// the results to innerHTML and wires events.

import { renderBarChartSvg, escapeXml } from './chart.js';
import { buildCfViews } from './diff.js';
import type { SessionState } from './state.js';
import { targetClass } from './state.js';

const esc = escapeXml;

export function renderForm(state: SessionState): string {
  const schema = state.schema;
  if (!schema) return '<p class="loading">loading schema…</p>';
  const rows = schema.features.map((spec, i) => {
    const value = state.values[i] ?? 0;
    const max = spec.kind === 'ordinal' ? spec.max_level ?? 0 : spec.max ?? 0;
    const pinned = state.immutable.includes(spec.name);
    return `
      <tr class="item-row" data-feature="${esc(spec.name)}">
        <td class="item-name">${esc(spec.name)}</td>
        <td class="item-desc">${esc(spec.description ?? '')}</td>
        <td>
          <input type="number" class="item-value" data-index="${i}"
                 min="0" max="${max}" step="1" value="${value}"
                 aria-label="${esc(spec.name)} score (0 to ${max})">
          <span class="item-range">/ ${max}</span>
        </td>
        <td>
          <label class="pin-label">
            <input type="checkbox" class="item-pin" data-feature="${esc(spec.name)}"
                   ${pinned ? 'checked' : ''}> keep fixed
          </label>
        </td>
      </tr>`;
  });
  return `
    <table class="symptom-form">
      <thead><tr><th>item</th><th>symptom</th><th>score</th><th>immutable</th></tr></thead>
      <tbody>${rows.join('')}</tbody>
    </table>`;
}

export function renderWarning(state: SessionState): string {
  return state.warning ? `<p class="warning">⚠ ${esc(state.warning)}</p>` : '';
}

export function renderPrediction(state: SessionState): string {
  const p = state.prediction;
  if (!p) return '<p class="muted">no prediction yet</p>';
  const label = p.class === 1 ? 'SNRI (1)' : 'SSRI (0)';
  const target = targetClass(state);
  const targetLabel = target === 1 ? 'SNRI (1)' : 'SSRI (0)';
  return `
    <p class="prediction">predicted class <strong>${label}</strong>
      with probability ${p.probability.toFixed(3)};
      counterfactuals will target <strong>${targetLabel}</strong></p>`;
}

export function renderDiffs(state: SessionState): string {
  if (state.error) {
    return renderError(state.error);
  }
  const set = state.cfs;
  if (!set) return '<p class="muted">no counterfactuals yet</p>';
  const views = buildCfViews(set);
  const cards = views.map((view) => {
    const rows = view.rows.map((row) => `
      <tr class="diff-row" data-feature="${esc(row.feature)}">
        <td class="diff-feature">${esc(row.feature)}</td>
        <td class="diff-old">${row.old}</td>
        <td class="diff-arrow ${row.direction}">${row.arrow} ${row.magnitude}</td>
        <td class="diff-new">${row.next}</td>
      </tr>`);
    const body = view.rows.length
      ? `<table class="diff-table"><tbody>${rows.join('')}</tbody></table>`
      : '<p class="muted">no changes</p>';
    return `
      <div class="cf-card" data-cf-index="${view.index}">
        <h4>counterfactual ${view.index + 1}
          <span class="cf-prob">p=${view.probability.toFixed(3)}</span></h4>
        ${body}
      </div>`;
  });
  const note = set.partial
    ? `<p class="warning">only ${set.cfs.length} of the requested counterfactuals were found</p>`
    : '';
  return `${note}<div class="cf-list" data-seed="${set.seed}">${cards.join('')}</div>`;
}

export function renderError(message: string): string {
  const hint = message.includes('NoCounterfactualFound') || message.includes('no valid counterfactual')
    ? '<p class="hint">hint: relax the immutability constraints or allow a larger k</p>'
    : '';
  return `<p class="error">no counterfactual found under these constraints</p>
    <p class="error-detail">${esc(message)}</p>${hint}`;
}

export function renderImportance(state: SessionState): string {
  if (!state.importance) return '';
  return renderBarChartSvg(state.importance, 'local feature importance (change frequency)');
}

export function renderControls(state: SessionState): string {
  const { k, lambda1, lambda2, seed } = state.params;
  const disabled = state.prediction === null || state.busy ? 'disabled' : '';
  return `
    <div class="controls">
      <label>k <input type="number" id="param-k" min="1" max="20" step="1" value="${k}"></label>
      <label>λ₁ <input type="number" id="param-lambda1" min="0" step="0.1" value="${lambda1}"></label>
      <label>λ₂ <input type="number" id="param-lambda2" min="0" step="0.1" value="${lambda2}"></label>
      <label>seed <input type="number" id="param-seed" step="1" value="${seed}"></label>
      <button id="btn-predict" ${state.busy ? 'disabled' : ''}>predict</button>
      <button id="btn-explain" ${disabled}>explain</button>
      <button id="btn-regenerate" ${disabled} title="same seed, same result">regenerate</button>
      <button id="btn-new-draw" ${disabled} title="advance the seed">new draw</button>
    </div>`;
}
