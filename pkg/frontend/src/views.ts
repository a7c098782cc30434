// Pure builders that turn service JSON into renderable table models, badge
// models, and download CSV text. Everything is pass-through: cell text is
// the service value stringified as-is, except MAPE cells, which show the
// mandated percent form and keep the raw fraction in a data attribute.

import { csvLine, escapeAttr, escapeHtml, mapePercent, rawText } from "./format.js";
import type {
  CorrelogramJson,
  DiagnosticsJson,
  FitCore,
  ForecastJson,
  MetricSetJson,
  QqJson,
  RollingResultJson,
  SelectionJson,
} from "./types.js";

export interface Cell {
  text: string;
  raw?: string;
}

export interface TableModel {
  caption: string;
  columns: string[];
  rows: Cell[][];
}

export interface BadgeModel {
  name: string;
  verdict: "pass" | "fail" | "unavailable";
  pText: string;
  pRaw: string;
  detail: string;
}

function plain(value: unknown): Cell {
  return { text: rawText(value) };
}

function mapeCell(fraction: number | null): Cell {
  return { text: mapePercent(fraction), raw: rawText(fraction) };
}

export function metricsTable(metrics: MetricSetJson, caption: string): TableModel {
  return {
    caption,
    columns: ["metric", "value"],
    rows: [
      [plain("RMSE"), plain(metrics.rmse)],
      [plain("MAPE"), mapeCell(metrics.mape)],
      [plain("MSE"), plain(metrics.mse)],
      [plain("RSE"), plain(metrics.rse)],
      [plain("observations used"), plain(metrics.n_used)],
      [plain("zero actuals skipped"), plain(metrics.n_skipped_zero)],
    ],
  };
}

export function inSampleTable(
  inSample: Record<string, MetricSetJson>,
  caption: string,
): TableModel {
  const rows = Object.keys(inSample)
    .sort()
    .map((model) => {
      const m = inSample[model];
      return [plain(model), plain(m.rmse), mapeCell(m.mape), plain(m.mse), plain(m.rse)];
    });
  return { caption, columns: ["model", "RMSE", "MAPE", "MSE", "RSE"], rows };
}

export function coefficientsTable(fit: FitCore): TableModel {
  const rows = Object.keys(fit.coefficients).map((name) => [
    plain(name),
    plain(fit.coefficients[name]),
  ]);
  rows.push([plain("sigma2"), plain(fit.sigma2)]);
  if (fit.ar) {
    rows.push([plain("AR order"), plain(fit.ar.order)]);
    fit.ar.phi.forEach((value, i) => {
      rows.push([plain(`AR phi[${i + 1}]`), plain(value)]);
    });
    rows.push([plain("AR intercept"), plain(fit.ar.intercept)]);
  }
  return {
    caption: `Coefficients (${fit.model})`,
    columns: ["name", "value"],
    rows,
  };
}

export function windowsTable(result: RollingResultJson, caption: string): TableModel {
  const rows = result.windows.map((w) => [
    plain(w.train_size),
    plain(w.horizon),
    w.error === null ? mapeCell(w.mape) : plain("failed"),
    plain(w.error ?? ""),
  ]);
  return { caption, columns: ["train size", "horizon", "MAPE", "error"], rows };
}

export function forecastTable(forecast: ForecastJson): TableModel {
  const rows = forecast.months.map((month, i) => [plain(month), plain(forecast.point[i])]);
  return {
    caption: `Forecast (${forecast.horizon} months)`,
    columns: ["month", "point forecast"],
    rows,
  };
}

export function candidateTable(selection: SelectionJson): TableModel {
  const rows: Cell[][] = [];
  for (const model of Object.keys(selection.candidates).sort()) {
    const r = selection.candidates[model];
    rows.push([plain(model), mapeCell(r.average_mape), plain(r.n_windows), plain(r.n_failed)]);
  }
  if (selection.corrected) {
    const r = selection.corrected;
    rows.push([plain(r.model), mapeCell(r.average_mape), plain(r.n_windows), plain(r.n_failed)]);
  }
  for (const model of Object.keys(selection.candidate_errors).sort()) {
    rows.push([plain(model), plain("failed"), plain(""), plain(selection.candidate_errors[model])]);
  }
  return {
    caption: "Rolling average MAPE by candidate",
    columns: ["model", "average MAPE", "windows", "failed"],
    rows,
  };
}

export function diagnosticsBadges(diag: DiagnosticsJson): BadgeModel[] {
  const badges: BadgeModel[] = [];
  if (diag.ljung_box) {
    const lb = diag.ljung_box;
    badges.push({
      name: "Ljung-Box (residual autocorrelation)",
      verdict: lb.p_value >= 0.05 ? "pass" : "fail",
      pText: rawText(lb.p_value),
      pRaw: rawText(lb.p_value),
      detail: `statistic ${rawText(lb.statistic)}, ${rawText(lb.lags_used)} lags, dof ${rawText(lb.dof)}`,
    });
  } else {
    badges.push({
      name: "Ljung-Box (residual autocorrelation)",
      verdict: "unavailable",
      pText: "n/a",
      pRaw: "",
      detail: diag.ljung_box_error ?? "not computed",
    });
  }
  if (diag.normality) {
    const nt = diag.normality;
    badges.push({
      name: `Normality (${nt.method})`,
      verdict: nt.p_value >= 0.05 ? "pass" : "fail",
      pText: rawText(nt.p_value),
      pRaw: rawText(nt.p_value),
      detail: `statistic ${rawText(nt.statistic)}`,
    });
  } else {
    badges.push({
      name: "Normality",
      verdict: "unavailable",
      pText: "n/a",
      pRaw: "",
      detail: diag.normality_error ?? "not computed",
    });
  }
  return badges;
}

export function finalChoiceResult(selection: SelectionJson): RollingResultJson | null {
  if (selection.corrected && selection.corrected.model === selection.final_choice) {
    return selection.corrected;
  }
  return selection.candidates[selection.final_choice] ?? null;
}

export function verdictText(selection: SelectionJson): string {
  return (
    `Best model: ${selection.final_choice} ` +
    `(average rolling MAPE ${mapePercent(selection.final_average_mape)})`
  );
}

// Download CSV builders: values verbatim from the response arrays.

export function fitSeriesCsv(fit: FitCore): string {
  const lines = [csvLine(["month", "actual", "fitted", "residual"])];
  fit.months.forEach((month, i) => {
    lines.push(
      csvLine([month, rawText(fit.actual[i]), rawText(fit.fitted[i]), rawText(fit.residuals[i])]),
    );
  });
  return lines.join("\n") + "\n";
}

export function forecastCsv(forecast: ForecastJson): string {
  const lines = [csvLine(["month", "point"])];
  forecast.months.forEach((month, i) => {
    lines.push(csvLine([month, rawText(forecast.point[i])]));
  });
  return lines.join("\n") + "\n";
}

export function correlogramCsv(part: CorrelogramJson): string {
  const lines = [csvLine(["lag", "value", "confidence_band"])];
  part.lags.forEach((lag, i) => {
    lines.push(csvLine([rawText(lag), rawText(part.values[i]), rawText(part.confidence_band)]));
  });
  return lines.join("\n") + "\n";
}

export function qqCsv(qq: QqJson): string {
  const lines = [csvLine(["theoretical", "sample"])];
  qq.theoretical.forEach((t, i) => {
    lines.push(csvLine([rawText(t), rawText(qq.sample[i])]));
  });
  return lines.join("\n") + "\n";
}

export function rollingCsv(results: Record<string, RollingResultJson>): string {
  const lines = [csvLine(["model", "train_size", "horizon", "mape", "error"])];
  for (const model of Object.keys(results).sort()) {
    for (const w of results[model].windows) {
      lines.push(
        csvLine([
          model,
          rawText(w.train_size),
          rawText(w.horizon),
          rawText(w.mape),
          rawText(w.error ?? ""),
        ]),
      );
    }
  }
  return lines.join("\n") + "\n";
}

export function renderTable(model: TableModel): string {
  const head = model.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const body = model.rows
    .map((row) => {
      const cells = row
        .map((cell) => {
          const raw = cell.raw === undefined ? "" : ` data-raw="${escapeAttr(cell.raw)}"`;
          return `<td${raw}>${escapeHtml(cell.text)}</td>`;
        })
        .join("");
      return `<tr>${cells}</tr>`;
    })
    .join("");
  return (
    `<table><caption>${escapeHtml(model.caption)}</caption>` +
    `<thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderBadges(badges: BadgeModel[]): string {
  return badges
    .map((badge) => {
      const raw = badge.pRaw ? ` data-raw="${escapeAttr(badge.pRaw)}"` : "";
      return (
        `<div class="badge-row"><span class="badge badge-${badge.verdict}">` +
        `${escapeHtml(badge.verdict)}</span> <strong>${escapeHtml(badge.name)}</strong> ` +
        `p-value <span class="p-value"${raw}>${escapeHtml(badge.pText)}</span> ` +
        `<span class="detail">${escapeHtml(badge.detail)}</span></div>`
      );
    })
    .join("");
}
