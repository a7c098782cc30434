// Display-only formatting. The dashboard renders service numbers verbatim;
// the single sanctioned transform is MAPE fraction -> percent with two
// decimals. Chart axis labels get a compact rounding that never feeds back
// into any displayed statistic.

export function rawText(value: unknown): string {
  if (value === null || value === undefined) {
    return "";
  }
  return String(value);
}

export function mapePercent(fraction: number | null | undefined): string {
  if (fraction === null || fraction === undefined) {
    return "n/a";
  }
  return (fraction * 100).toFixed(2) + "%";
}

export function tickLabel(value: number): string {
  if (!Number.isFinite(value)) {
    return "";
  }
  if (value !== 0 && (Math.abs(value) >= 1e6 || Math.abs(value) < 1e-3)) {
    return value.toExponential(1);
  }
  const rounded = Number(value.toPrecision(4));
  return String(rounded);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function escapeAttr(text: string): string {
  return escapeHtml(text);
}

// RFC-4180 style quoting for download files.
export function csvCell(text: string): string {
  if (/[",\n\r]/.test(text)) {
    return '"' + text.replace(/"/g, '""') + '"';
  }
  return text;
}

export function csvLine(cells: string[]): string {
  return cells.map(csvCell).join(",");
}
