// Hand-rolled SVG charts. Everything here is presentation geometry: the
// numbers plotted come straight from service responses and are also
// available as downloadable tables, so no statistic exists only in a chart.

import { escapeAttr, escapeHtml, tickLabel } from "./format.js";

export interface XY {
  x: number;
  y: number;
}

export interface LineSeries {
  label: string;
  color: string;
  points: XY[];
  dashed?: boolean;
  markers?: boolean;
}

const WIDTH = 640;
const HEIGHT = 300;
const MARGIN = { top: 28, right: 16, bottom: 44, left: 64 };

interface Scale {
  (value: number): number;
  min: number;
  max: number;
}

function makeScale(min: number, max: number, rangeA: number, rangeB: number): Scale {
  if (!(max > min)) {
    max = min + 1;
    min = min - 1;
  }
  const f = (value: number) =>
    rangeA + ((value - min) / (max - min)) * (rangeB - rangeA);
  f.min = min;
  f.max = max;
  return f;
}

function ticks(min: number, max: number, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i <= count; i++) {
    out.push(min + ((max - min) * i) / count);
  }
  return out;
}

function axes(
  sx: Scale,
  sy: Scale,
  xLabel: string,
  yLabel: string,
  xTickText?: (value: number) => string,
): string {
  const parts: string[] = [];
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(
    `<line class="axis" x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}"></line>`,
    `<line class="axis" x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}"></line>`,
  );
  for (const t of ticks(sx.min, sx.max)) {
    const px = sx(t);
    const text = xTickText ? xTickText(t) : tickLabel(t);
    parts.push(
      `<line class="tick" x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 4}"></line>`,
      `<text class="tick-label" x="${px}" y="${y0 + 16}" text-anchor="middle">${escapeHtml(text)}</text>`,
    );
  }
  for (const t of ticks(sy.min, sy.max)) {
    const py = sy(t);
    parts.push(
      `<line class="tick" x1="${x0 - 4}" y1="${py}" x2="${x0}" y2="${py}"></line>`,
      `<text class="tick-label" x="${x0 - 8}" y="${py + 4}" text-anchor="end">${escapeHtml(tickLabel(t))}</text>`,
    );
  }
  parts.push(
    `<text class="axis-label" x="${(x0 + x1) / 2}" y="${HEIGHT - 6}" text-anchor="middle">${escapeHtml(xLabel)}</text>`,
    `<text class="axis-label" x="14" y="${(y0 + y1) / 2}" text-anchor="middle" transform="rotate(-90 14 ${(y0 + y1) / 2})">${escapeHtml(yLabel)}</text>`,
  );
  return parts.join("");
}

function wrap(title: string, inner: string): string {
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="${escapeAttr(title)}">` +
    `<text class="chart-title" x="${MARGIN.left}" y="16">${escapeHtml(title)}</text>` +
    inner +
    "</svg>"
  );
}

function extent(values: number[]): [number, number] {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  if (min === Infinity) {
    return [0, 1];
  }
  if (min === max) {
    return [min - 1, max + 1];
  }
  return [min, max];
}

export function lineChart(options: {
  title: string;
  series: LineSeries[];
  xLabel: string;
  yLabel: string;
  xTickText?: (value: number) => string;
  includeZero?: boolean;
}): string {
  const xs = options.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = options.series.flatMap((s) => s.points.map((p) => p.y));
  if (options.includeZero) {
    ys.push(0);
  }
  const [xMin, xMax] = extent(xs);
  const [yMin, yMax] = extent(ys);
  const sx = makeScale(xMin, xMax, MARGIN.left, WIDTH - MARGIN.right);
  const sy = makeScale(yMin, yMax, HEIGHT - MARGIN.bottom, MARGIN.top);
  const parts: string[] = [axes(sx, sy, options.xLabel, options.yLabel, options.xTickText)];
  let legendX = MARGIN.left + 8;
  for (const series of options.series) {
    const coords = series.points
      .filter((p) => Number.isFinite(p.y))
      .map((p) => `${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`)
      .join(" ");
    const dash = series.dashed ? ' stroke-dasharray="5 3"' : "";
    if (coords.length > 0) {
      parts.push(
        `<polyline fill="none" stroke="${series.color}"${dash} stroke-width="1.5" points="${coords}"></polyline>`,
      );
    }
    if (series.markers) {
      for (const p of series.points) {
        if (Number.isFinite(p.y)) {
          parts.push(
            `<circle cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="2.5" fill="${series.color}"></circle>`,
          );
        }
      }
    }
    parts.push(
      `<rect x="${legendX}" y="${MARGIN.top - 6}" width="12" height="3" fill="${series.color}"></rect>`,
      `<text class="legend" x="${legendX + 16}" y="${MARGIN.top - 2}">${escapeHtml(series.label)}</text>`,
    );
    legendX += 16 + 7 * series.label.length + 18;
  }
  return wrap(options.title, parts.join(""));
}

export function barChart(options: {
  title: string;
  lags: number[];
  values: (number | null)[];
  band: number | null;
  xLabel: string;
  yLabel: string;
}): string {
  const finite = options.values.filter((v): v is number => v !== null && Number.isFinite(v));
  const bandValues = options.band === null ? [] : [options.band, -options.band];
  const [yMinRaw, yMaxRaw] = extent([...finite, ...bandValues, 0]);
  const sx = makeScale(
    Math.min(...options.lags) - 0.5,
    Math.max(...options.lags) + 0.5,
    MARGIN.left,
    WIDTH - MARGIN.right,
  );
  const sy = makeScale(yMinRaw, yMaxRaw, HEIGHT - MARGIN.bottom, MARGIN.top);
  const parts: string[] = [
    axes(sx, sy, options.xLabel, options.yLabel, (v) => String(Math.round(v))),
  ];
  const zeroY = sy(0);
  parts.push(
    `<line class="zero" x1="${MARGIN.left}" y1="${zeroY}" x2="${WIDTH - MARGIN.right}" y2="${zeroY}"></line>`,
  );
  if (options.band !== null) {
    for (const b of [options.band, -options.band]) {
      const py = sy(b);
      parts.push(
        `<line class="band" stroke-dasharray="4 3" x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}"></line>`,
      );
    }
  }
  const slot = (WIDTH - MARGIN.left - MARGIN.right) / Math.max(options.lags.length, 1);
  const barWidth = Math.max(2, Math.min(14, slot * 0.5));
  options.lags.forEach((lag, i) => {
    const value = options.values[i];
    if (value === null || !Number.isFinite(value)) {
      return;
    }
    const px = sx(lag) - barWidth / 2;
    const top = Math.min(sy(value), zeroY);
    const height = Math.abs(sy(value) - zeroY);
    parts.push(
      `<rect class="bar" x="${px.toFixed(1)}" y="${top.toFixed(1)}" width="${barWidth.toFixed(1)}" height="${height.toFixed(1)}"></rect>`,
    );
  });
  return wrap(options.title, parts.join(""));
}

export function scatterChart(options: {
  title: string;
  points: XY[];
  xLabel: string;
  yLabel: string;
  identityLine?: boolean;
  zeroLine?: boolean;
  xTickText?: (value: number) => string;
}): string {
  const xs = options.points.map((p) => p.x);
  const ys = options.points.map((p) => p.y);
  if (options.zeroLine) {
    ys.push(0);
  }
  let [xMin, xMax] = extent(xs);
  let [yMin, yMax] = extent(ys);
  if (options.identityLine) {
    // Shared extent keeps the y = x reference at 45 degrees.
    xMin = yMin = Math.min(xMin, yMin);
    xMax = yMax = Math.max(xMax, yMax);
  }
  const sx = makeScale(xMin, xMax, MARGIN.left, WIDTH - MARGIN.right);
  const sy = makeScale(yMin, yMax, HEIGHT - MARGIN.bottom, MARGIN.top);
  const parts: string[] = [axes(sx, sy, options.xLabel, options.yLabel, options.xTickText)];
  if (options.zeroLine) {
    const zeroY = sy(0);
    parts.push(
      `<line class="zero" x1="${MARGIN.left}" y1="${zeroY}" x2="${WIDTH - MARGIN.right}" y2="${zeroY}"></line>`,
    );
  }
  if (options.identityLine) {
    parts.push(
      `<line class="identity" stroke-dasharray="4 3" x1="${sx(xMin)}" y1="${sy(xMin)}" x2="${sx(xMax)}" y2="${sy(xMax)}"></line>`,
    );
  }
  for (const p of options.points) {
    if (Number.isFinite(p.x) && Number.isFinite(p.y)) {
      parts.push(
        `<circle class="dot" cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="2.5"></circle>`,
      );
    }
  }
  return wrap(options.title, parts.join(""));
}
