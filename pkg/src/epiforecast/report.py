"""Shared JSON and plain-text rendering for fits, rolling runs, selections.

The CLI and the HTTP service both go through these builders so that the
same analysis serializes to byte-identical JSON regardless of entry
point. Canonical JSON sorts keys, indents by two, and maps non-finite
floats to null.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .diagnostics import (
    acf,
    default_ljung_box_lags,
    ljung_box,
    normality_test,
    pacf,
    qq_points,
)
from .errors import EpiForecastError
from .evaluation import MetricSet, RollingResult, SelectionReport, in_sample_metrics
from .models import ArCorrected, FittedModel, ForecastResult, model_label
from .series import MonthlySeries

SCHEMA_VERSION = 1


def _clean(obj: Any) -> Any:
    """Recursively replace non-finite floats with None for JSON output."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(float(v)) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def metric_set_dict(metrics: MetricSet) -> dict:
    return {
        "rmse": metrics.rmse,
        "mape": metrics.mape,
        "mse": metrics.mse,
        "rse": metrics.rse,
        "n_used": metrics.n_used,
        "n_skipped_zero": metrics.n_skipped_zero,
    }


def rolling_result_dict(result: RollingResult) -> dict:
    return {
        "model": model_label(result.model),
        "average_mape": result.average_mape,
        "n_windows": len(result.windows),
        "n_failed": result.n_failed,
        "windows": [
            {
                "train_size": w.train_size,
                "horizon": w.horizon,
                "mape": w.mape,
                "error": w.error,
            }
            for w in result.windows
        ],
    }


def fitted_model_dict(fit: FittedModel, series: MonthlySeries) -> dict:
    months = [str(series.month_at(i)) for i in range(fit.effective_start, fit.effective_end + 1)]
    out = {
        "model": model_label(fit.kind),
        "coefficients": dict(fit.coefficients),
        "sigma2": fit.sigma2,
        "n_params": fit.n_params,
        "effective_start": fit.effective_start,
        "months": months,
        "actual": list(series.values[fit.effective_start : fit.effective_end + 1]),
        "fitted": list(fit.fitted),
        "residuals": list(fit.residuals),
        "log_offset": fit.log_offset,
        "time_scale": {"center": fit.time_scale.center, "scale": fit.time_scale.scale},
    }
    if fit.ar_part is not None:
        out["ar"] = {
            "order": fit.ar_part.order,
            "phi": list(fit.ar_part.phi),
            "intercept": fit.ar_part.intercept,
            "innovation_variance": fit.ar_part.innovation_variance,
            "aic": fit.ar_part.aic,
        }
    return out


def forecast_dict(result: ForecastResult) -> dict:
    return {
        "horizon": result.horizon,
        "months": [str(m) for m in result.months],
        "point": list(result.point),
    }


def diagnostics_dict(fit: FittedModel) -> dict:
    """Residual diagnostics bundle; individually degradable pieces."""
    residuals = fit.residuals
    n = residuals.size
    out: dict[str, Any] = {"n_residuals": int(n)}
    max_lag = max(1, min(24, n - 1))
    lags = default_ljung_box_lags(n)
    try:
        a = acf(residuals, max_lag)
        out["acf"] = {
            "lags": list(a.lags),
            "values": list(a.values),
            "confidence_band": a.confidence_band,
        }
        p = pacf(residuals, max_lag)
        out["pacf"] = {
            "lags": list(p.lags),
            "values": list(p.values),
            "confidence_band": p.confidence_band,
        }
    except EpiForecastError as exc:
        out["acf_error"] = str(exc)
    try:
        lb = ljung_box(residuals, lags, fitted_params=fit.n_params)
        out["ljung_box"] = {
            "statistic": lb.statistic,
            "lags_used": lb.lags_used,
            "dof": lb.dof,
            "p_value": lb.p_value,
        }
    except EpiForecastError as exc:
        out["ljung_box_error"] = str(exc)
    try:
        norm = normality_test(residuals)
        out["normality"] = {
            "statistic": norm.statistic,
            "p_value": norm.p_value,
            "method": norm.method,
        }
    except EpiForecastError as exc:
        out["normality_error"] = str(exc)
    try:
        qq = qq_points(residuals)
        out["qq"] = {
            "theoretical": [point[0] for point in qq],
            "sample": [point[1] for point in qq],
        }
    except EpiForecastError as exc:
        out["qq_error"] = str(exc)
    return out


def fit_bundle(
    fit: FittedModel,
    series: MonthlySeries,
    forecast_result: ForecastResult | None = None,
) -> dict:
    bundle = {
        "schema_version": SCHEMA_VERSION,
        "region": series.region,
        "series": {
            "start": str(series.start),
            "end": str(series.end),
            "n": len(series),
        },
        "fit": fitted_model_dict(fit, series),
        "metrics": metric_set_dict(in_sample_metrics(fit, series)),
        "diagnostics": diagnostics_dict(fit),
    }
    if isinstance(fit.kind, ArCorrected):
        bundle["base_model"] = model_label(fit.kind.base)
        bundle["ar_order"] = fit.ar_part.order if fit.ar_part is not None else None
    if forecast_result is not None:
        bundle["forecast"] = forecast_dict(forecast_result)
    return bundle


def selection_bundle(report: SelectionReport, series: MonthlySeries) -> dict:
    candidates = {
        model_label(kind): rolling_result_dict(result)
        for kind, result in report.candidate_results.items()
    }
    in_sample = {
        model_label(kind): metric_set_dict(metrics)
        for kind, metrics in report.in_sample.items()
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "region": series.region,
        "series": {"start": str(series.start), "end": str(series.end), "n": len(series)},
        "candidates": candidates,
        "candidate_errors": {
            model_label(kind): message
            for kind, message in report.candidate_errors.items()
        },
        "base_choice": model_label(report.base_choice),
        "corrected": (
            rolling_result_dict(report.corrected_result)
            if report.corrected_result is not None
            else None
        ),
        "final_choice": model_label(report.final_choice),
        "final_average_mape": report.final_average_mape,
        "in_sample": in_sample,
    }


def rolling_bundle(result: RollingResult, series: MonthlySeries) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "region": series.region,
        "series": {"start": str(series.start), "end": str(series.end), "n": len(series)},
        "rolling": rolling_result_dict(result),
    }


def fit_plot_data(fit: FittedModel, series: MonthlySeries) -> dict:
    d = diagnostics_dict(fit)
    return {
        "schema_version": SCHEMA_VERSION,
        "months": [str(series.month_at(i)) for i in range(fit.effective_start, fit.effective_end + 1)],
        "actual": list(series.values[fit.effective_start : fit.effective_end + 1]),
        "fitted": list(fit.fitted),
        "residuals": list(fit.residuals),
        "acf": d.get("acf"),
        "pacf": d.get("pacf"),
        "qq": d.get("qq"),
    }


def rolling_plot_data(results: dict[str, RollingResult]) -> dict:
    series_block = {}
    for label, result in results.items():
        series_block[label] = {
            "train_sizes": [w.train_size for w in result.windows],
            "mape": [w.mape for w in result.windows],
            "average_mape": result.average_mape,
        }
    return {"schema_version": SCHEMA_VERSION, "rolling_mape": series_block}


def _fmt(x: float | None, nd: int = 4) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "-"
    return f"{x:.{nd}f}"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    parts = [line(headers), line(["-" * w for w in widths])]
    parts.extend(line(row) for row in rows)
    return "\n".join(parts)


def metrics_row(label: str, metrics: MetricSet) -> list[str]:
    return [
        label,
        _fmt(metrics.rmse, 2),
        _fmt(metrics.mape * 100.0, 2),
        _fmt(metrics.mse, 2),
        _fmt(metrics.rse, 2),
    ]


METRIC_HEADERS = ["model", "RMSE", "MAPE%", "MSE", "RSE"]


def fit_report_text(
    fit: FittedModel,
    series: MonthlySeries,
    forecast_result: ForecastResult | None = None,
) -> str:
    lines = []
    title = f"Fit report: {model_label(fit.kind)}"
    if series.region:
        title += f" on {series.region}"
    lines.append(title)
    lines.append(f"Series {series.start} .. {series.end} ({len(series)} months)")
    lines.append("")
    lines.append("Coefficients")
    coef_rows = [[name, _fmt(value, 6)] for name, value in fit.coefficients.items()]
    lines.append(_table(["term", "estimate"], coef_rows))
    if fit.ar_part is not None:
        lines.append("")
        lines.append(
            f"AR error model: order {fit.ar_part.order}, "
            f"intercept {_fmt(fit.ar_part.intercept, 6)}, AIC {_fmt(fit.ar_part.aic, 2)}"
        )
        if fit.ar_part.order > 0:
            phi_rows = [
                [f"phi{i + 1}", _fmt(v, 6)] for i, v in enumerate(fit.ar_part.phi)
            ]
            lines.append(_table(["term", "estimate"], phi_rows))
    lines.append("")
    lines.append("In-sample accuracy")
    metrics = in_sample_metrics(fit, series)
    lines.append(_table(METRIC_HEADERS, [metrics_row(model_label(fit.kind), metrics)]))
    if metrics.n_skipped_zero:
        lines.append(
            f"(MAPE over {metrics.n_used} nonzero months; "
            f"{metrics.n_skipped_zero} zero months skipped)"
        )
    d = diagnostics_dict(fit)
    lines.append("")
    lines.append("Residual diagnostics")
    diag_rows = []
    if "ljung_box" in d:
        lb = d["ljung_box"]
        diag_rows.append(
            ["Ljung-Box", _fmt(lb["statistic"], 3),
             f"dof={lb['dof']}", f"p={_fmt(lb['p_value'], 4)}"]
        )
    if "normality" in d:
        norm = d["normality"]
        diag_rows.append(
            [norm["method"], _fmt(norm["statistic"], 3), "", f"p={_fmt(norm['p_value'], 4)}"]
        )
    if diag_rows:
        lines.append(_table(["test", "statistic", "", ""], diag_rows))
    else:
        lines.append("(not enough residuals for diagnostics)")
    lines.append("")
    lines.append("Fitted vs actual")
    months = [
        str(series.month_at(i))
        for i in range(fit.effective_start, fit.effective_end + 1)
    ]
    actuals = series.values[fit.effective_start : fit.effective_end + 1]
    fva_rows = [
        [month, _fmt(actual, 1), _fmt(fitted, 1), _fmt(actual - fitted, 1)]
        for month, actual, fitted in zip(months, actuals, fit.fitted)
    ]
    lines.append(_table(["month", "actual", "fitted", "error"], fva_rows))
    if forecast_result is not None:
        lines.append("")
        lines.append("Forecast")
        fc_rows = [
            [str(m), _fmt(v, 1)]
            for m, v in zip(forecast_result.months, forecast_result.point)
        ]
        lines.append(_table(["month", "point"], fc_rows))
    return "\n".join(lines) + "\n"


def rolling_report_text(result: RollingResult, series: MonthlySeries) -> str:
    lines = []
    title = f"Rolling forecast: {model_label(result.model)}"
    if series.region:
        title += f" on {series.region}"
    lines.append(title)
    lines.append(
        f"{len(result.windows)} windows, average MAPE "
        f"{_fmt(result.average_mape * 100.0, 2)}%"
        + (f" ({result.n_failed} failed)" if result.n_failed else "")
    )
    lines.append("")
    rows = []
    for w in result.windows:
        rows.append(
            [
                str(w.train_size),
                str(w.horizon),
                _fmt(w.mape * 100.0, 2) if w.mape is not None else "-",
                w.error or "",
            ]
        )
    lines.append(_table(["train", "horizon", "MAPE%", "error"], rows))
    return "\n".join(lines) + "\n"


def selection_report_text(report: SelectionReport, series: MonthlySeries) -> str:
    lines = []
    title = "Model selection"
    if series.region:
        title += f" for {series.region}"
    lines.append(title)
    lines.append(f"Series {series.start} .. {series.end} ({len(series)} months)")
    lines.append("")
    lines.append("Rolling out-of-sample average MAPE")
    rows = []
    for kind, result in sorted(
        report.candidate_results.items(), key=lambda item: item[0].number
    ):
        rows.append(
            [
                model_label(kind),
                _fmt(result.average_mape * 100.0, 2),
                str(len(result.windows)),
                str(result.n_failed),
            ]
        )
    for kind, message in report.candidate_errors.items():
        rows.append([model_label(kind), "-", "-", message])
    if report.corrected_result is not None:
        rows.append(
            [
                model_label(ArCorrected(report.base_choice)),
                _fmt(report.corrected_result.average_mape * 100.0, 2),
                str(len(report.corrected_result.windows)),
                str(report.corrected_result.n_failed),
            ]
        )
    lines.append(_table(["model", "avg MAPE%", "windows", "failed"], rows))
    lines.append("")
    lines.append(f"Base choice:  {model_label(report.base_choice)}")
    lines.append(f"Final choice: {model_label(report.final_choice)}")
    lines.append(
        f"Final average rolling MAPE: {_fmt(report.final_average_mape * 100.0, 2)}%"
    )
    if report.in_sample:
        lines.append("")
        lines.append("In-sample accuracy (full series)")
        metric_rows = []
        for kind, metrics in report.in_sample.items():
            metric_rows.append(metrics_row(model_label(kind), metrics))
        lines.append(_table(METRIC_HEADERS, metric_rows))
    per_window = [
        w.mape
        for w in (
            report.corrected_result.windows
            if isinstance(report.final_choice, ArCorrected)
            and report.corrected_result is not None
            else report.candidate_results[
                report.final_choice if not isinstance(report.final_choice, ArCorrected)
                else report.base_choice
            ].windows
        )
        if w.mape is not None
    ]
    if per_window:
        lines.append("")
        lines.append("Per-window MAPE% of the final choice (first five)")
        head = per_window[:5]
        rows = [
            [f"window {i + 1}", _fmt(value * 100.0, 2)] for i, value in enumerate(head)
        ]
        lines.append(_table(["window", "MAPE%"], rows))
    return "\n".join(lines) + "\n"
