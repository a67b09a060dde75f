import type { CorrelationResult, Histogram, LoessCurve } from "./types.js";

// Charts render straight from EDA report JSON (not the server's SVG files)
// so the what-if marker can be overlaid on the LOESS trend.

const WIDTH = 560;
const HEIGHT = 320;
const ML = 52, MR = 16, MT = 30, MB = 42;
const PW = WIDTH - ML - MR;
const PH = HEIGHT - MT - MB;

const fmt = (v: number) => v.toFixed(2);

function open(title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" class="chart">`,
    `<text x="${WIDTH / 2}" y="18" text-anchor="middle" class="chart-title">${title}</text>`,
    `<line x1="${ML}" y1="${MT}" x2="${ML}" y2="${MT + PH}" stroke="currentColor"/>`,
    `<line x1="${ML}" y1="${MT + PH}" x2="${ML + PW}" y2="${MT + PH}" stroke="currentColor"/>`,
  ];
}

export function histogramSvg(hist: Histogram): string {
  const lines = open(`${hist.feature_name} (n=${hist.n})`);
  const lo = hist.bin_edges[0];
  const hi = hist.bin_edges[hist.bin_edges.length - 1];
  const span = hi - lo || 1;
  const peak = Math.max(...hist.counts, 1);
  hist.counts.forEach((count, i) => {
    const x = ML + ((hist.bin_edges[i] - lo) / span) * PW;
    const w = ((hist.bin_edges[i + 1] - hist.bin_edges[i]) / span) * PW;
    const h = (count / peak) * PH;
    lines.push(`<rect x="${fmt(x)}" y="${fmt(MT + PH - h)}" width="${fmt(w)}"`
      + ` height="${fmt(h)}" class="bar"/>`);
  });
  lines.push(`<text x="${ML}" y="${HEIGHT - 10}" class="chart-label">${fmt(lo)}</text>`);
  lines.push(`<text x="${ML + PW}" y="${HEIGHT - 10}" text-anchor="end"`
    + ` class="chart-label">${fmt(hi)}</text>`);
  lines.push("</svg>");
  return lines.join("\n");
}

export function correlationSvg(correlations: CorrelationResult[]): string {
  const lines = open("Pearson r vs engagement");
  const mid = MT + PH / 2;
  lines.push(`<line x1="${ML}" y1="${mid}" x2="${ML + PW}" y2="${mid}"`
    + ` stroke="currentColor" stroke-dasharray="4 4" opacity="0.4"/>`);
  const slot = PW / Math.max(correlations.length, 1);
  correlations.forEach((c, i) => {
    const x = ML + i * slot + slot * 0.2;
    const w = slot * 0.6;
    const h = Math.abs(c.r) * (PH / 2);
    const y = c.r >= 0 ? mid - h : mid;
    lines.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}"`
      + ` height="${fmt(h)}" class="${c.r >= 0 ? "bar" : "bar-neg"}"/>`);
    lines.push(`<text x="${fmt(x + w / 2)}" y="${HEIGHT - 24}" text-anchor="middle"`
      + ` class="chart-label">${c.feature_name}</text>`);
    lines.push(`<text x="${fmt(x + w / 2)}" y="${HEIGHT - 10}" text-anchor="middle"`
      + ` class="chart-label">${c.r >= 0 ? "+" : ""}${c.r.toFixed(3)}</text>`);
  });
  lines.push("</svg>");
  return lines.join("\n");
}

export interface LoessMarker {
  x: number; // feature value (baseline + delta), from the scenario request
  y: number; // predicted engagement, from the API response
}

export function loessSvg(curve: LoessCurve, marker?: LoessMarker): string {
  const lines = open(`engagement vs ${curve.feature_name} (span=${curve.span})`);
  const xs = curve.eval_x;
  const ys = curve.fitted_y;
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (marker) {
    xLo = Math.min(xLo, marker.x);
    xHi = Math.max(xHi, marker.x);
    yLo = Math.min(yLo, marker.y);
    yHi = Math.max(yHi, marker.y);
  }
  const xSpan = xHi - xLo || 1;
  const ySpan = yHi - yLo || 1;
  const px = (x: number) => ML + ((x - xLo) / xSpan) * PW;
  const py = (y: number) => MT + PH - ((y - yLo) / ySpan) * PH;
  const path = xs.map((x, i) => `${fmt(px(x))},${fmt(py(ys[i]))}`).join(" ");
  lines.push(`<polyline points="${path}" fill="none" class="trend"/>`);
  if (marker) {
    lines.push(`<circle cx="${fmt(px(marker.x))}" cy="${fmt(py(marker.y))}"`
      + ` r="5" class="marker"/>`);
  }
  lines.push(`<text x="${ML}" y="${HEIGHT - 10}" class="chart-label">${fmt(xLo)}</text>`);
  lines.push(`<text x="${ML + PW}" y="${HEIGHT - 10}" text-anchor="end"`
    + ` class="chart-label">${fmt(xHi)}</text>`);
  lines.push("</svg>");
  return lines.join("\n");
}
