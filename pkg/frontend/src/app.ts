// Dashboard wiring: upload a CSV, pick a region and model, browse the Fit,
// Diagnostics, Rolling, and Report tabs. All statistics come from the
// service; this file only routes responses into tables and charts.

import { errorMessage, type ApiLike, type ApiResult } from "./api.js";
import { barChart, lineChart, scatterChart, type LineSeries } from "./charts.js";
import { escapeHtml } from "./format.js";
import type {
  FitResponse,
  RollingAllResponse,
  RollingConfig,
  UploadSummary,
} from "./types.js";
import {
  candidateTable,
  coefficientsTable,
  correlogramCsv,
  diagnosticsBadges,
  finalChoiceResult,
  fitSeriesCsv,
  forecastCsv,
  forecastTable,
  inSampleTable,
  metricsTable,
  qqCsv,
  renderBadges,
  renderTable,
  rollingCsv,
  verdictText,
  windowsTable,
} from "./views.js";

export type TabName = "fit" | "diagnostics" | "rolling" | "report";

export const MODEL_CHOICES = [
  "poly-season",
  "log",
  "lag-trend",
  "lag-poly",
  "ar-corrected",
  "ar-corrected(poly-season)",
  "ar-corrected(log)",
  "ar-corrected(lag-trend)",
  "ar-corrected(lag-poly)",
];

export interface AppState {
  sessionId: string | null;
  regions: string[];
  dateSpan: [string, string] | null;
  nMonths: number;
  region: string | null;
  model: string;
  forecastMonths: number;
  rollingConfig: RollingConfig;
  activeTab: TabName;
  uploadError: string | null;
  fit: FitResponse | null;
  fitError: string | null;
  fitPending: boolean;
  rolling: RollingAllResponse | null;
  rollingError: string | null;
  rollingPending: boolean;
  jobNote: string | null;
  downloads: Record<string, { filename: string; text: string }>;
}

export interface AppController {
  readonly state: AppState;
  uploadFile(file: Blob, name?: string): Promise<void>;
  runFit(): Promise<void>;
  runRolling(): Promise<void>;
  setTab(tab: TabName): void;
}

const LINE_COLORS = ["#1b6ca8", "#d1495b", "#3a7d44", "#8d6a9f", "#c77b30"];

const SKELETON = `
<header>
  <h1>Case-count forecasting dashboard</h1>
</header>
<section class="panel" id="upload-panel">
  <label>Monthly case CSV
    <input type="file" id="file-input" accept=".csv,text/csv">
  </label>
  <button id="upload-button" type="button">Upload</button>
  <span id="dataset-banner" class="banner"></span>
  <div id="upload-error" class="error" role="alert" hidden></div>
</section>
<section class="panel controls" id="controls" hidden>
  <label>Region <select id="region-select"></select></label>
  <label>Model <select id="model-select"></select></label>
  <label>Forecast months <input type="number" id="forecast-input" min="0" value="0"></label>
  <button id="fit-button" type="button">Fit model</button>
  <span class="spacer"></span>
  <label>Min train <input type="number" id="min-train-input" min="1" value="36"></label>
  <label>Horizon <input type="number" id="horizon-input" min="1" value="3"></label>
  <label>Mode
    <select id="mode-select">
      <option value="fixed">fixed</option>
      <option value="to-end">to-end</option>
    </select>
  </label>
  <label>Log offset <input type="number" id="log-offset-input" min="0" step="0.5" value="1"></label>
  <button id="rolling-button" type="button">Run rolling analysis</button>
</section>
<nav class="tabs" id="tabs" hidden>
  <button data-tab="fit" aria-selected="true" type="button">Fit</button>
  <button data-tab="diagnostics" aria-selected="false" type="button">Diagnostics</button>
  <button data-tab="rolling" aria-selected="false" type="button">Rolling</button>
  <button data-tab="report" aria-selected="false" type="button">Report</button>
</nav>
<main>
  <section class="tab-panel" id="tab-fit"></section>
  <section class="tab-panel" id="tab-diagnostics" hidden></section>
  <section class="tab-panel" id="tab-rolling" hidden></section>
  <section class="tab-panel" id="tab-report" hidden></section>
</main>
`;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function downloadButton(key: string, label: string): string {
  return `<button type="button" class="download" data-download="${key}">${escapeHtml(label)}</button>`;
}

export function initApp(
  root: HTMLElement,
  api: ApiLike,
  options: { pollIntervalMs?: number } = {},
): AppController {
  const pollInterval = options.pollIntervalMs ?? 500;
  root.innerHTML = SKELETON;

  const el = <T extends HTMLElement>(id: string): T => {
    const found = root.querySelector<T>("#" + id);
    if (!found) {
      throw new Error(`missing element #${id}`);
    }
    return found;
  };

  const fileInput = el<HTMLInputElement>("file-input");
  const uploadButton = el<HTMLButtonElement>("upload-button");
  const banner = el<HTMLSpanElement>("dataset-banner");
  const uploadError = el<HTMLDivElement>("upload-error");
  const controls = el<HTMLElement>("controls");
  const regionSelect = el<HTMLSelectElement>("region-select");
  const modelSelect = el<HTMLSelectElement>("model-select");
  const forecastInput = el<HTMLInputElement>("forecast-input");
  const minTrainInput = el<HTMLInputElement>("min-train-input");
  const horizonInput = el<HTMLInputElement>("horizon-input");
  const modeSelect = el<HTMLSelectElement>("mode-select");
  const logOffsetInput = el<HTMLInputElement>("log-offset-input");
  const tabs = el<HTMLElement>("tabs");

  modelSelect.innerHTML = MODEL_CHOICES.map(
    (name) => `<option value="${name}">${name}</option>`,
  ).join("");

  const state: AppState = {
    sessionId: null,
    regions: [],
    dateSpan: null,
    nMonths: 0,
    region: null,
    model: MODEL_CHOICES[0],
    forecastMonths: 0,
    rollingConfig: { min_train: 36, horizon: 3, mode: "fixed", log_offset: 1 },
    activeTab: "fit",
    uploadError: null,
    fit: null,
    fitError: null,
    fitPending: false,
    rolling: null,
    rollingError: null,
    rollingPending: false,
    jobNote: null,
    downloads: {},
  };

  function setDownload(key: string, filename: string, text: string): void {
    state.downloads[key] = { filename, text };
  }

  function statusLine(text: string): string {
    return `<p class="status">${escapeHtml(text)}</p>`;
  }

  function renderUpload(): void {
    if (state.uploadError !== null) {
      uploadError.hidden = false;
      uploadError.textContent = state.uploadError;
    } else {
      uploadError.hidden = true;
      uploadError.textContent = "";
    }
    if (state.sessionId && state.dateSpan) {
      banner.textContent =
        `${state.regions.length} regions, ${state.nMonths} months ` +
        `(${state.dateSpan[0]} to ${state.dateSpan[1]})`;
      controls.hidden = false;
      tabs.hidden = false;
    }
  }

  function monthTick(months: string[]): (v: number) => string {
    return (v) => {
      const i = Math.round(v);
      return i >= 0 && i < months.length && Math.abs(v - i) < 0.25 ? months[i] : "";
    };
  }

  function renderFitTab(): void {
    const panel = el<HTMLElement>("tab-fit");
    if (state.fitError !== null) {
      panel.innerHTML = `<div class="error">${escapeHtml(state.fitError)}</div>`;
      return;
    }
    if (!state.fit) {
      panel.innerHTML = statusLine(
        state.fitPending ? "Fitting..." : "Upload data and fit a model to see results.",
      );
      return;
    }
    const fit = state.fit.fit;
    const months = fit.months;
    const actualSeries: LineSeries = {
      label: "actual",
      color: LINE_COLORS[0],
      markers: true,
      points: months.map((_, i) => ({ x: i, y: fit.actual[i] ?? NaN })),
    };
    const fittedSeries: LineSeries = {
      label: "fitted",
      color: LINE_COLORS[1],
      dashed: true,
      points: months.map((_, i) => ({ x: i, y: fit.fitted[i] ?? NaN })),
    };
    const chart = lineChart({
      title: `Actual vs fitted: ${state.fit.region} (${fit.model})`,
      series: [actualSeries, fittedSeries],
      xLabel: "month",
      yLabel: "cases",
      xTickText: monthTick(months),
    });
    const residualChart = scatterChart({
      title: "Residuals over time",
      points: months.map((_, i) => ({ x: i, y: fit.residuals[i] ?? NaN })),
      xLabel: "month",
      yLabel: "residual",
      zeroLine: true,
      xTickText: monthTick(months),
    });
    setDownload("fit-series", `fit_${state.fit.region}.csv`, fitSeriesCsv(fit));
    const pieces = [
      state.fitPending ? statusLine("Refitting...") : "",
      chart,
      downloadButton("fit-series", "Download fitted series CSV"),
      residualChart,
      renderTable(metricsTable(state.fit.metrics, `In-sample metrics (${fit.model})`)),
      renderTable(coefficientsTable(fit)),
    ];
    if (state.fit.forecast) {
      setDownload(
        "forecast",
        `forecast_${state.fit.region}.csv`,
        forecastCsv(state.fit.forecast),
      );
      pieces.push(
        renderTable(forecastTable(state.fit.forecast)),
        downloadButton("forecast", "Download forecast CSV"),
      );
    }
    panel.innerHTML = pieces.join("\n");
  }

  function renderDiagnosticsTab(): void {
    const panel = el<HTMLElement>("tab-diagnostics");
    if (!state.fit) {
      panel.innerHTML = statusLine("Fit a model to see residual diagnostics.");
      return;
    }
    const diag = state.fit.diagnostics;
    const pieces: string[] = [renderBadges(diagnosticsBadges(diag))];
    if (diag.acf) {
      pieces.push(
        barChart({
          title: "Residual ACF",
          lags: diag.acf.lags,
          values: diag.acf.values,
          band: diag.acf.confidence_band,
          xLabel: "lag",
          yLabel: "autocorrelation",
        }),
      );
      setDownload("acf", "acf.csv", correlogramCsv(diag.acf));
      pieces.push(downloadButton("acf", "Download ACF CSV"));
    } else if (diag.acf_error) {
      pieces.push(statusLine(`ACF unavailable: ${diag.acf_error}`));
    }
    if (diag.pacf) {
      pieces.push(
        barChart({
          title: "Residual PACF",
          lags: diag.pacf.lags,
          values: diag.pacf.values,
          band: diag.pacf.confidence_band,
          xLabel: "lag",
          yLabel: "partial autocorrelation",
        }),
      );
      setDownload("pacf", "pacf.csv", correlogramCsv(diag.pacf));
      pieces.push(downloadButton("pacf", "Download PACF CSV"));
    } else if (diag.pacf_error) {
      pieces.push(statusLine(`PACF unavailable: ${diag.pacf_error}`));
    }
    if (diag.qq) {
      pieces.push(
        scatterChart({
          title: "Residual Q-Q plot",
          points: diag.qq.theoretical.map((t, i) => ({ x: t, y: diag.qq!.sample[i] })),
          xLabel: "theoretical quantile",
          yLabel: "sample quantile",
          identityLine: true,
        }),
      );
      setDownload("qq", "qq.csv", qqCsv(diag.qq));
      pieces.push(downloadButton("qq", "Download Q-Q CSV"));
    } else if (diag.qq_error) {
      pieces.push(statusLine(`Q-Q points unavailable: ${diag.qq_error}`));
    }
    panel.innerHTML = pieces.join("\n");
  }

  function renderRollingTab(): void {
    const panel = el<HTMLElement>("tab-rolling");
    const pieces: string[] = [];
    if (state.rollingPending) {
      pieces.push(statusLine(state.jobNote ?? "Rolling analysis running..."));
    }
    if (state.rollingError !== null) {
      pieces.push(`<div class="error">${escapeHtml(state.rollingError)}</div>`);
    }
    if (state.rolling) {
      const results = state.rolling.rolling_results;
      const labels = Object.keys(results).sort();
      const series: LineSeries[] = labels.map((label, i) => ({
        label,
        color: LINE_COLORS[i % LINE_COLORS.length],
        markers: true,
        points: results[label].windows
          .filter((w) => w.error === null && w.mape !== null)
          .map((w) => ({ x: w.train_size, y: w.mape as number })),
      }));
      pieces.push(`<div class="banner verdict">${escapeHtml(verdictText(state.rolling.selection))}</div>`);
      pieces.push(
        lineChart({
          title: `Rolling MAPE by training size: ${state.rolling.region}`,
          series,
          xLabel: "training months",
          yLabel: "MAPE (fraction)",
          includeZero: true,
          xTickText: (v) => String(Math.round(v)),
        }),
      );
      const failures: string[] = [];
      for (const label of labels) {
        for (const w of results[label].windows) {
          if (w.error !== null) {
            failures.push(`${label}, train size ${w.train_size}: ${w.error}`);
          }
        }
      }
      for (const [model, err] of Object.entries(state.rolling.selection.candidate_errors)) {
        failures.push(`${model}: ${err}`);
      }
      if (failures.length > 0) {
        pieces.push(
          `<div class="failures"><strong>Failed windows</strong><ul>` +
            failures.map((f) => `<li>${escapeHtml(f)}</li>`).join("") +
            "</ul></div>",
        );
      }
      setDownload("rolling", `rolling_${state.rolling.region}.csv`, rollingCsv(results));
      pieces.push(downloadButton("rolling", "Download rolling windows CSV"));
    } else if (!state.rollingPending && state.rollingError === null) {
      pieces.push(statusLine("Run the rolling analysis to compare models."));
    }
    panel.innerHTML = pieces.join("\n");
  }

  function renderReportTab(): void {
    const panel = el<HTMLElement>("tab-report");
    if (!state.rolling) {
      panel.innerHTML = statusLine("Run the rolling analysis to build the report.");
      return;
    }
    const selection = state.rolling.selection;
    const pieces = [
      `<div class="banner verdict">${escapeHtml(verdictText(selection))}</div>`,
      statusLine(
        `Base choice before correction: ${selection.base_choice} ` +
          `(series ${selection.series.start} to ${selection.series.end}, n=${selection.series.n})`,
      ),
      renderTable(candidateTable(selection)),
      renderTable(inSampleTable(selection.in_sample, "In-sample metrics on the full series")),
    ];
    const finalResult = finalChoiceResult(selection);
    if (finalResult) {
      pieces.push(
        renderTable(
          windowsTable(finalResult, `Per-window MAPE of the final choice (${finalResult.model})`),
        ),
      );
    }
    panel.innerHTML = pieces.join("\n");
  }

  function renderTabs(): void {
    for (const button of Array.from(tabs.querySelectorAll<HTMLButtonElement>("button[data-tab]"))) {
      const selected = button.dataset.tab === state.activeTab;
      button.setAttribute("aria-selected", String(selected));
    }
    for (const tab of ["fit", "diagnostics", "rolling", "report"] as TabName[]) {
      el<HTMLElement>("tab-" + tab).hidden = tab !== state.activeTab;
    }
  }

  function renderAll(): void {
    renderUpload();
    renderFitTab();
    renderDiagnosticsTab();
    renderRollingTab();
    renderReportTab();
    renderTabs();
  }

  async function uploadFile(file: Blob, name = "data.csv"): Promise<void> {
    state.uploadError = null;
    let result: ApiResult;
    try {
      result = await api.uploadDataset(file, name);
    } catch (err) {
      state.uploadError = `network error: ${String(err)}; check the service and retry`;
      renderAll();
      return;
    }
    if (!result.ok) {
      state.uploadError = errorMessage(result);
      renderAll();
      return;
    }
    const summary = result.body as UploadSummary;
    state.sessionId = summary.session_id;
    state.regions = summary.regions;
    state.dateSpan = summary.date_span;
    state.nMonths = summary.n_months;
    state.region = summary.regions[0] ?? null;
    state.fit = null;
    state.fitError = null;
    state.rolling = null;
    state.rollingError = null;
    regionSelect.innerHTML = summary.regions
      .map((r) => `<option value="${escapeHtml(r)}">${escapeHtml(r)}</option>`)
      .join("");
    renderAll();
  }

  async function runFit(): Promise<void> {
    if (!state.sessionId || !state.region) {
      return;
    }
    state.fitPending = true;
    renderAll();
    let result: ApiResult;
    try {
      result = await api.fit(state.sessionId, {
        region: state.region,
        model: state.model,
        options: {
          forecast: state.forecastMonths,
          log_offset: state.rollingConfig.log_offset,
        },
      });
    } catch (err) {
      state.fitPending = false;
      state.fitError = `network error: ${String(err)}; retry when the service is back`;
      renderAll();
      return;
    }
    if (result.stale) {
      return; // a newer fit request is already in flight
    }
    state.fitPending = false;
    if (!result.ok) {
      state.fitError = errorMessage(result);
    } else {
      state.fitError = null;
      state.fit = result.body as FitResponse;
    }
    renderAll();
  }

  async function runRolling(): Promise<void> {
    if (!state.sessionId || !state.region) {
      return;
    }
    state.rollingPending = true;
    state.jobNote = null;
    renderAll();
    let result: ApiResult;
    try {
      result = await api.rolling(state.sessionId, {
        region: state.region,
        model: "all",
        ...state.rollingConfig,
      });
    } catch (err) {
      state.rollingPending = false;
      state.rollingError = `network error: ${String(err)}; retry when the service is back`;
      renderAll();
      return;
    }
    if (result.stale) {
      return;
    }
    if (result.status === 202 && result.body?.job_id) {
      const jobId = result.body.job_id as string;
      let polls = 0;
      for (;;) {
        polls += 1;
        state.jobNote = `Background job ${jobId} running (poll ${polls})...`;
        renderRollingTab();
        let snapshot: ApiResult;
        try {
          snapshot = await api.job(jobId);
        } catch (err) {
          state.rollingPending = false;
          state.rollingError = `network error while polling job: ${String(err)}`;
          renderAll();
          return;
        }
        if (!snapshot.ok) {
          state.rollingPending = false;
          state.rollingError = errorMessage(snapshot);
          renderAll();
          return;
        }
        const status = snapshot.body?.status;
        if (status === "done") {
          result = { ...snapshot, body: snapshot.body.result };
          break;
        }
        if (status === "failed") {
          state.rollingPending = false;
          state.rollingError =
            snapshot.body?.error?.message ?? "rolling job failed";
          renderAll();
          return;
        }
        await sleep(pollInterval);
      }
    }
    state.rollingPending = false;
    state.jobNote = null;
    if (!result.ok && result.status !== 202) {
      state.rollingError = errorMessage(result);
    } else {
      state.rollingError = null;
      state.rolling = result.body as RollingAllResponse;
    }
    renderAll();
  }

  function setTab(tab: TabName): void {
    state.activeTab = tab;
    renderTabs();
  }

  uploadButton.addEventListener("click", () => {
    const file = fileInput.files?.[0];
    if (file) {
      void uploadFile(file, file.name);
    } else {
      state.uploadError = "choose a CSV file first";
      renderUpload();
    }
  });
  regionSelect.addEventListener("change", () => {
    state.region = regionSelect.value;
    if (state.fit) {
      void runFit();
    }
    if (state.rolling) {
      void runRolling();
    }
  });
  modelSelect.addEventListener("change", () => {
    state.model = modelSelect.value;
    if (state.sessionId) {
      void runFit();
    }
  });
  forecastInput.addEventListener("change", () => {
    state.forecastMonths = Math.max(0, Number(forecastInput.value) || 0);
  });
  const readRollingConfig = () => {
    state.rollingConfig = {
      min_train: Math.max(1, Number(minTrainInput.value) || 36),
      horizon: Math.max(1, Number(horizonInput.value) || 3),
      mode: modeSelect.value === "to-end" ? "to-end" : "fixed",
      log_offset: Math.max(0, Number(logOffsetInput.value) || 0),
    };
    // Recompute with the new settings; the previous chart stays on screen
    // until the fresh result lands.
    if (state.rolling) {
      void runRolling();
    }
  };
  for (const input of [minTrainInput, horizonInput, modeSelect, logOffsetInput]) {
    input.addEventListener("change", readRollingConfig);
  }
  el<HTMLButtonElement>("fit-button").addEventListener("click", () => void runFit());
  el<HTMLButtonElement>("rolling-button").addEventListener("click", () => void runRolling());
  tabs.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const tab = target.dataset?.tab as TabName | undefined;
    if (tab) {
      setTab(tab);
    }
  });
  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const key = target.dataset?.download;
    if (!key) {
      return;
    }
    const entry = state.downloads[key];
    if (!entry || typeof URL.createObjectURL !== "function") {
      return;
    }
    const blob = new Blob([entry.text], { type: "text/csv" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = entry.filename;
    link.click();
    URL.revokeObjectURL(link.href);
  });

  renderAll();
  return { state, uploadFile, runFit, runRolling, setTab };
}
