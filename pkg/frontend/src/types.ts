// Shapes of the service JSON bodies the dashboard consumes. Field names
// mirror the wire format exactly; everything optional here is genuinely
// optional on the wire (degraded diagnostics, absent forecast, and so on).

export interface ErrorBody {
  schema_version: number;
  error: { code: string; message: string };
}

export interface UploadSummary {
  schema_version: number;
  session_id: string;
  regions: string[];
  date_span: [string, string];
  n_months: number;
}

export interface SeriesInfo {
  start: string;
  end: string;
  n: number;
}

export interface MetricSetJson {
  rmse: number | null;
  mape: number | null;
  mse: number | null;
  rse: number | null;
  n_used: number;
  n_skipped_zero: number;
}

export interface ArJson {
  order: number;
  phi: number[];
  intercept: number;
  innovation_variance: number;
  aic: number | null;
}

export interface FitCore {
  model: string;
  months: string[];
  actual: (number | null)[];
  fitted: (number | null)[];
  residuals: (number | null)[];
  coefficients: Record<string, number>;
  sigma2: number;
  n_params: number;
  effective_start: number;
  log_offset: number;
  time_scale: { center: number; scale: number };
  ar?: ArJson;
}

export interface CorrelogramJson {
  lags: number[];
  values: (number | null)[];
  confidence_band: number | null;
}

export interface LjungBoxJson {
  statistic: number;
  lags_used: number;
  dof: number;
  p_value: number;
}

export interface NormalityJson {
  statistic: number;
  p_value: number;
  method: string;
}

export interface QqJson {
  theoretical: number[];
  sample: number[];
}

export interface DiagnosticsJson {
  n_residuals: number;
  acf?: CorrelogramJson;
  acf_error?: string;
  pacf?: CorrelogramJson;
  pacf_error?: string;
  ljung_box?: LjungBoxJson;
  ljung_box_error?: string;
  normality?: NormalityJson;
  normality_error?: string;
  qq?: QqJson;
  qq_error?: string;
}

export interface ForecastJson {
  horizon: number;
  months: string[];
  point: number[];
}

export interface FitResponse {
  schema_version: number;
  region: string;
  series: SeriesInfo;
  fit: FitCore;
  metrics: MetricSetJson;
  diagnostics: DiagnosticsJson;
  forecast?: ForecastJson;
  base_model?: string;
  ar_order?: number;
}

export interface WindowJson {
  train_size: number;
  horizon: number;
  mape: number | null;
  error: string | null;
}

export interface RollingResultJson {
  model: string;
  windows: WindowJson[];
  average_mape: number | null;
  n_windows: number;
  n_failed: number;
}

export interface RollingSingleResponse {
  schema_version: number;
  region: string;
  series: SeriesInfo;
  rolling: RollingResultJson;
}

export interface SelectionJson {
  schema_version: number;
  region: string;
  series: SeriesInfo;
  candidates: Record<string, RollingResultJson>;
  candidate_errors: Record<string, string>;
  base_choice: string;
  corrected: RollingResultJson | null;
  final_choice: string;
  final_average_mape: number | null;
  in_sample: Record<string, MetricSetJson>;
}

export interface RollingAllResponse {
  schema_version: number;
  region: string;
  series: SeriesInfo;
  rolling_results: Record<string, RollingResultJson>;
  selection: SelectionJson;
}

export interface JobAccepted {
  schema_version: number;
  job_id: string;
  status: string;
}

export interface JobSnapshot {
  schema_version: number;
  job_id: string;
  status: "running" | "done" | "failed";
  result: RollingSingleResponse | RollingAllResponse | null;
  error: { code: string; message: string } | null;
}

export interface RollingConfig {
  min_train: number;
  horizon: number;
  mode: "fixed" | "to-end";
  log_offset: number;
}

export interface FitRequest {
  region: string;
  model: string;
  options?: { forecast?: number; log_offset?: number };
}

export interface RollingRequest extends RollingConfig {
  region: string;
  model: string;
}
