"""Command-line interface: fit, roll, select, and serve.

Primary outputs are deterministic: the human-readable report goes to
``<out>`` (or stdout), the canonical JSON bundle to ``<out>.json``, and
plot-ready data to ``<out>.plot.json``. Run timestamps live only in
``<out>.meta.json`` so repeated runs produce byte-identical primaries.

Exit codes: 0 success, 2 usage, 10 I/O, 11 validation or bad data,
12 unknown region, 13 insufficient data, 14 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

from .errors import (
    AllWindowsFailedError,
    DataFormatError,
    DegenerateInputError,
    EpiForecastError,
    InsufficientDataError,
    NonPositiveValueError,
    RegionNotFoundError,
    SingularDesignError,
    UndefinedMetricError,
    ValidationError,
)
from .evaluation import (
    SelectionConfig,
    resolve_model_kind,
    rolling_forecast,
    select_model,
)
from .ingest import Dataset, parse_csv
from .models import (
    ArCorrected,
    DEFAULT_LOG_OFFSET,
    MIN_TRAINING_MONTHS,
    fit_model,
    forecast,
    model_label,
)
from . import report
from .series import MonthlySeries

EXIT_OK = 0
EXIT_IO = 10
EXIT_VALIDATION = 11
EXIT_REGION = 12
EXIT_INSUFFICIENT = 13
EXIT_NUMERICAL = 14

_EXIT_BY_ERROR = (
    (RegionNotFoundError, EXIT_REGION),
    (InsufficientDataError, EXIT_INSUFFICIENT),
    ((SingularDesignError, DegenerateInputError, AllWindowsFailedError), EXIT_NUMERICAL),
    (
        (ValidationError, DataFormatError, NonPositiveValueError, UndefinedMetricError),
        EXIT_VALIDATION,
    ),
)

MODEL_CHOICES = "poly-season, log, lag-trend, lag-poly, ar-corrected, ar-corrected(<base>)"


def exit_code_for(exc: EpiForecastError) -> int:
    for types, code in _EXIT_BY_ERROR:
        if isinstance(exc, types):
            return code
    return EXIT_VALIDATION


def _fail(exc: EpiForecastError) -> int:
    print(f"error[{exc.code}]: {exc}", file=sys.stderr)
    return exit_code_for(exc)


def _load_dataset(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return parse_csv(handle.read())


def _get_region(dataset: Dataset, name: str) -> MonthlySeries:
    if name not in dataset.regions:
        raise RegionNotFoundError(name, dataset.region_names())
    return dataset.regions[name]


def thread_count(n_tasks: int) -> int:
    """Worker count for --all, capped by EPIFORECAST_THREADS."""
    raw = os.environ.get("EPIFORECAST_THREADS", "").strip()
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ValidationError(
                f"EPIFORECAST_THREADS must be an integer, got {raw!r}"
            ) from None
        if cap < 1:
            raise ValidationError(f"EPIFORECAST_THREADS must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(n_tasks, cap))


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _write_outputs(
    out: str | None,
    human: str,
    bundle: dict,
    plot: dict | None,
    config_echo: dict,
) -> None:
    if out is None:
        sys.stdout.write(human)
        return
    _atomic_write(out, human)
    _atomic_write(out + ".json", report.canonical_json(bundle))
    if plot is not None:
        _atomic_write(out + ".plot.json", report.canonical_json(plot))
    meta = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "config": config_echo,
    }
    _atomic_write(out + ".meta.json", report.canonical_json(meta))
    written = [out, out + ".json"] + ([out + ".plot.json"] if plot is not None else [])
    for path in written:
        print(f"wrote {path}")


def _config_echo(args: argparse.Namespace, command: str) -> dict:
    echo = {"command": command, "data": args.data}
    for key in ("region", "model", "min_train", "horizon", "mode", "log_offset", "out"):
        if hasattr(args, key):
            echo[key] = getattr(args, key)
    if getattr(args, "all", False):
        echo["all"] = True
    return echo


def _selection_config(args: argparse.Namespace) -> SelectionConfig:
    return SelectionConfig(
        min_train=args.min_train,
        horizon=args.horizon,
        mode=args.mode,
        log_offset=args.log_offset,
    )


def cmd_fit(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.data)
    series = _get_region(dataset, args.region)
    kind = resolve_model_kind(args.model, series, _selection_config(args))
    fit = fit_model(series, kind, log_offset=args.log_offset)
    forecast_result = forecast(fit, series, args.forecast) if args.forecast else None
    human = report.fit_report_text(fit, series, forecast_result)
    bundle = report.fit_bundle(fit, series, forecast_result)
    plot = report.fit_plot_data(fit, series)
    _write_outputs(args.out, human, bundle, plot, _config_echo(args, "fit"))
    return EXIT_OK


def cmd_roll(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.data)
    series = _get_region(dataset, args.region)
    config = _selection_config(args)
    kind = resolve_model_kind(args.model, series, config)
    result = rolling_forecast(
        series, kind,
        min_train=args.min_train, horizon=args.horizon,
        mode=args.mode, log_offset=args.log_offset,
    )
    human = report.rolling_report_text(result, series)
    bundle = report.rolling_bundle(result, series)
    plot = report.rolling_plot_data({model_label(kind): result})
    _write_outputs(args.out, human, bundle, plot, _config_echo(args, "roll"))
    return EXIT_OK


def _select_region(series: MonthlySeries, config: SelectionConfig) -> dict:
    selection = select_model(series, config)
    bundle = report.selection_bundle(selection, series)
    rolling_results = {
        model_label(kind): result
        for kind, result in selection.candidate_results.items()
    }
    if selection.corrected_result is not None:
        rolling_results[
            model_label(ArCorrected(selection.base_choice))
        ] = selection.corrected_result
    plot = report.rolling_plot_data(rolling_results)
    final_fit = selection.fits.get(selection.final_choice)
    if final_fit is not None:
        plot["final_fit"] = report.fit_plot_data(final_fit, series)
    return {
        "selection": selection,
        "bundle": bundle,
        "plot": plot,
        "text": report.selection_report_text(selection, series),
    }


def cmd_select(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.data)
    if args.all:
        regions = dataset.region_names()
    else:
        regions = [args.region]
        _get_region(dataset, args.region)
    config = _selection_config(args)

    successes: dict[str, dict] = {}
    failures: dict[str, EpiForecastError] = {}

    def run(region: str):
        return _select_region(dataset.regions[region], config)

    workers = thread_count(len(regions))
    if workers == 1 or len(regions) == 1:
        outcomes = []
        for region in regions:
            try:
                outcomes.append(run(region))
            except EpiForecastError as exc:
                outcomes.append(exc)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, region) for region in regions]
            outcomes = []
            for future in futures:
                try:
                    outcomes.append(future.result())
                except EpiForecastError as exc:
                    outcomes.append(exc)
    for region, outcome in zip(regions, outcomes):
        if isinstance(outcome, EpiForecastError):
            failures[region] = outcome
        else:
            successes[region] = outcome

    for region in regions:
        if region in failures:
            exc = failures[region]
            print(f"error[{exc.code}]: region {region!r}: {exc}", file=sys.stderr)
    if not successes:
        return exit_code_for(failures[regions[0]])

    per_region = {region: successes[region]["bundle"] for region in successes}
    bundle = {
        "schema_version": report.SCHEMA_VERSION,
        "per_region": per_region,
        "failures": {
            region: {"code": exc.code, "message": str(exc)}
            for region, exc in failures.items()
        },
        "best_models": {
            region: successes[region]["bundle"]["final_choice"]
            for region in successes
        },
    }
    plot = {
        "schema_version": report.SCHEMA_VERSION,
        "per_region": {region: successes[region]["plot"] for region in successes},
    }
    sections = [successes[region]["text"] for region in sorted(successes)]
    summary_rows = "\n".join(
        f"  {region}: {bundle['best_models'][region]}" for region in sorted(successes)
    )
    human = (
        "\n".join(sections)
        + "\nBest model per region\n"
        + summary_rows
        + "\n"
    )
    _write_outputs(args.out, human, bundle, plot, _config_echo(args, "select"))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    app = create_app(
        ServiceConfig(
            max_upload_bytes=args.size_limit,
            session_ttl_seconds=args.ttl,
            static_dir=args.static_dir,
        )
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, with_model: bool) -> None:
    parser.add_argument("--data", required=True, help="path to the input CSV")
    if with_model:
        parser.add_argument(
            "--model", required=True, help=f"model name: one of {MODEL_CHOICES}"
        )
    parser.add_argument(
        "--min-train", type=int, default=MIN_TRAINING_MONTHS, dest="min_train",
        help="smallest training prefix for rolling forecasts",
    )
    parser.add_argument(
        "--horizon", type=int, default=3, help="forecast steps per rolling window"
    )
    parser.add_argument(
        "--mode", choices=("fixed", "to-end"), default="fixed",
        help="fixed: up to --horizon steps per window; to-end: all remaining months",
    )
    parser.add_argument(
        "--log-offset", type=float, default=DEFAULT_LOG_OFFSET, dest="log_offset",
        help="offset added before taking logs (0 = strict positive counts)",
    )
    parser.add_argument("--out", default=None, help="output path stem")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epiforecast",
        description="Seasonal count forecasting: fit, rolling evaluation, selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one model to one region")
    _add_common(fit, with_model=True)
    fit.add_argument("--region", required=True, help="region column name")
    fit.add_argument(
        "--forecast", type=int, default=0,
        help="also forecast this many months ahead",
    )
    fit.set_defaults(func=cmd_fit)

    roll = sub.add_parser("roll", help="rolling out-of-sample evaluation of one model")
    _add_common(roll, with_model=True)
    roll.add_argument("--region", required=True, help="region column name")
    roll.set_defaults(func=cmd_roll)

    select = sub.add_parser("select", help="full model selection per region")
    _add_common(select, with_model=False)
    group = select.add_mutually_exclusive_group(required=True)
    group.add_argument("--region", help="region column name")
    group.add_argument("--all", action="store_true", help="run every region")
    select.set_defaults(func=cmd_select)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument(
        "--size-limit", type=int, default=5 * 1024 * 1024, dest="size_limit",
        help="maximum upload size in bytes",
    )
    serve.add_argument(
        "--ttl", type=int, default=2 * 60 * 60,
        help="session lifetime in seconds",
    )
    serve.add_argument(
        "--static-dir", default=None, dest="static_dir",
        help="directory of built web UI files to serve at /",
    )
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EpiForecastError as exc:
        return _fail(exc)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
