// Hand-drawn SVG bar chart for importance scores: sorted descending,
// score-proportional widths, no chart library.

import type { ImportanceReport } from './types.js';

export interface Bar {
  feature: string;
  score: number;
  /** bar length as a fraction of the full axis (score is already in [0,1]) */
  fraction: number;
}

export function buildBars(report: ImportanceReport): Bar[] {
  return Object.entries(report.scores)
    .sort(([na, sa], [nb, sb]) => (sb - sa) || na.localeCompare(nb))
    .map(([feature, score]) => ({ feature, score, fraction: Math.max(0, Math.min(1, score)) }));
}

const ROW_H = 22;
const LABEL_W = 72;
const AXIS_W = 360;
const PAD = 6;

export function renderBarChartSvg(report: ImportanceReport, title: string): string {
  const bars = buildBars(report);
  const height = bars.length * ROW_H + 30;
  const width = LABEL_W + AXIS_W + 60;
  const parts: string[] = [];
  parts.push(
    `<svg class="importance-chart" role="img" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">`,
  );
  parts.push(`<text x="${PAD}" y="16" class="chart-title">${escapeXml(title)}</text>`);
  bars.forEach((bar, i) => {
    const y = 24 + i * ROW_H;
    const w = Math.round(bar.fraction * AXIS_W);
    parts.push(`<text x="${LABEL_W - PAD}" y="${y + 14}" text-anchor="end" class="bar-label">${escapeXml(bar.feature)}</text>`);
    parts.push(`<rect x="${LABEL_W}" y="${y + 2}" width="${w}" height="${ROW_H - 6}" class="bar" data-feature="${escapeXml(bar.feature)}" data-score="${bar.score}"></rect>`);
    parts.push(`<text x="${LABEL_W + w + PAD}" y="${y + 14}" class="bar-value">${bar.score.toFixed(2)}</text>`);
  });
  parts.push('</svg>');
  return parts.join('');
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
