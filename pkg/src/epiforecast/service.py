"""HTTP facade over ingest, fitting, diagnostics, and rolling evaluation.

Uploaded CSVs live in in-memory sessions keyed by unguessable tokens with
a fixed TTL from creation. Every computation is repeatable from the CLI
with the same CSV and parameters: responses are rendered through the same
canonical serializers, so the bodies compare byte-equal. Long rolling
runs (estimated window count above a threshold) return a job id to poll
instead of blocking the request.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request, Response, UploadFile, File

from . import report
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
from .ingest import Dataset, parse_csv, write_csv
from .models import (
    ArCorrected,
    DEFAULT_LOG_OFFSET,
    MIN_TRAINING_MONTHS,
    fit_model,
    forecast,
    model_label,
    parse_model_name,
)
from .series import MonthlySeries


class SessionExpiredError(EpiForecastError):
    code = "session-expired"


class UnknownSessionError(EpiForecastError):
    code = "unknown-session"


class UploadTooLargeError(EpiForecastError):
    code = "upload-too-large"


_STATUS_BY_ERROR = (
    ((DataFormatError, ValidationError), 400),
    ((RegionNotFoundError, SessionExpiredError, UnknownSessionError), 404),
    (UploadTooLargeError, 413),
    ((InsufficientDataError, NonPositiveValueError, UndefinedMetricError), 422),
    ((SingularDesignError, DegenerateInputError, AllWindowsFailedError), 500),
)


def status_for(exc: EpiForecastError) -> int:
    for types, status in _STATUS_BY_ERROR:
        if isinstance(exc, types):
            return status
    return 500


@dataclass
class ServiceConfig:
    max_upload_bytes: int = 5 * 1024 * 1024
    session_ttl_seconds: float = 2 * 60 * 60
    job_window_threshold: int = 60
    static_dir: str | None = None
    persist_dir: str | None = None
    clock: Callable[[], float] = time.time


@dataclass
class Session:
    id: str
    dataset: Dataset
    created_at: float
    expires_at: float


class SessionStore:
    """Lock-guarded session map with lazy TTL expiry.

    Expired sessions leave a tombstone so later reads can distinguish
    "expired" from "never existed". With a persist directory, sessions
    survive process restarts as CSV snapshots.
    """

    def __init__(
        self,
        ttl_seconds: float,
        clock: Callable[[], float] = time.time,
        persist_dir: str | None = None,
    ):
        self.ttl = ttl_seconds
        self.clock = clock
        self.persist_dir = Path(persist_dir) if persist_dir else None
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._expired: set[str] = set()
        if self.persist_dir is not None:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._load_persisted()

    def create(self, dataset: Dataset) -> Session:
        session_id = secrets.token_urlsafe(32)
        now = self.clock()
        session = Session(session_id, dataset, now, now + self.ttl)
        with self._lock:
            self._sessions[session_id] = session
        if self.persist_dir is not None:
            payload = {
                "created_at": session.created_at,
                "expires_at": session.expires_at,
                "csv": write_csv(dataset),
            }
            path = self.persist_dir / f"{session_id}.json"
            path.write_text(json.dumps(payload), encoding="utf-8")
        return session

    def get(self, session_id: str) -> Session:
        now = self.clock()
        with self._lock:
            session = self._sessions.get(session_id)
            if session is not None and now >= session.expires_at:
                del self._sessions[session_id]
                self._expired.add(session_id)
                self._drop_persisted(session_id)
                session = None
            if session is None:
                if session_id in self._expired:
                    raise SessionExpiredError(f"session {session_id} has expired")
                raise UnknownSessionError(f"unknown session {session_id}")
            return session

    def _drop_persisted(self, session_id: str) -> None:
        if self.persist_dir is None:
            return
        try:
            (self.persist_dir / f"{session_id}.json").unlink()
        except OSError:
            pass

    def _load_persisted(self) -> None:
        assert self.persist_dir is not None
        now = self.clock()
        for path in sorted(self.persist_dir.glob("*.json")):
            try:
                payload = json.loads(path.read_text(encoding="utf-8"))
                if now >= float(payload["expires_at"]):
                    path.unlink()
                    continue
                dataset = parse_csv(payload["csv"])
            except (OSError, ValueError, KeyError, EpiForecastError):
                continue
            session_id = path.stem
            self._sessions[session_id] = Session(
                session_id, dataset,
                float(payload["created_at"]), float(payload["expires_at"]),
            )


@dataclass
class Job:
    id: str
    status: str  # "running" | "done" | "failed"
    result: dict | None = None
    error: dict | None = None


class JobStore:
    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}

    def start(self, work: Callable[[], dict]) -> Job:
        job_id = secrets.token_urlsafe(16)
        job = Job(job_id, "running")
        with self._lock:
            self._jobs[job_id] = job

        def runner():
            try:
                result = work()
            except EpiForecastError as exc:
                with self._lock:
                    job.status = "failed"
                    job.error = {"code": exc.code, "message": str(exc)}
            except Exception as exc:  # pragma: no cover - defensive
                with self._lock:
                    job.status = "failed"
                    job.error = {"code": "error", "message": str(exc)}
            else:
                with self._lock:
                    job.result = result
                    job.status = "done"

        threading.Thread(target=runner, daemon=True).start()
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise UnknownSessionError(f"unknown job {job_id}")
            return job

    def snapshot(self, job_id: str) -> dict:
        job = self.get(job_id)
        with self._lock:
            return {
                "schema_version": report.SCHEMA_VERSION,
                "job_id": job.id,
                "status": job.status,
                "result": job.result,
                "error": job.error,
            }


def _canonical_response(body: dict, status_code: int = 200) -> Response:
    return Response(
        content=report.canonical_json(body),
        status_code=status_code,
        media_type="application/json",
    )


def _error_response(exc: EpiForecastError) -> Response:
    body = {
        "schema_version": report.SCHEMA_VERSION,
        "error": {"code": exc.code, "message": str(exc)},
    }
    return _canonical_response(body, status_for(exc))


def _require(body: dict, key: str) -> Any:
    if key not in body:
        raise ValidationError(f"missing required field {key!r}")
    return body[key]


def _int_field(body: dict, key: str, default: int, minimum: int) -> int:
    value = body.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{key} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{key} must be >= {minimum}, got {value}")
    return value


def _float_field(body: dict, key: str, default: float, minimum: float) -> float:
    value = body.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{key} must be >= {minimum}, got {value}")
    return float(value)


def _rolling_config(body: dict) -> SelectionConfig:
    mode = body.get("mode", "fixed")
    if mode not in ("fixed", "to-end"):
        raise ValidationError(f"mode must be 'fixed' or 'to-end', got {mode!r}")
    max_ar = body.get("max_ar_order")
    if max_ar is not None and (not isinstance(max_ar, int) or max_ar < 0):
        raise ValidationError(f"max_ar_order must be a nonnegative integer, got {max_ar!r}")
    return SelectionConfig(
        min_train=_int_field(body, "min_train", MIN_TRAINING_MONTHS, 1),
        horizon=_int_field(body, "horizon", 3, 1),
        mode=mode,
        log_offset=_float_field(body, "log_offset", DEFAULT_LOG_OFFSET, 0.0),
        max_ar_order=max_ar,
    )


def _dataset_summary(session: Session) -> dict:
    dataset = session.dataset
    first = next(iter(dataset.regions.values()))
    return {
        "schema_version": report.SCHEMA_VERSION,
        "session_id": session.id,
        "regions": dataset.region_names(),
        "date_span": [str(dataset.date_span[0]), str(dataset.date_span[1])],
        "n_months": len(first),
    }


def _get_series(session: Session, region: str) -> MonthlySeries:
    if region not in session.dataset.regions:
        raise RegionNotFoundError(region, session.dataset.region_names())
    return session.dataset.regions[region]


def _fit_response(series: MonthlySeries, body: dict) -> dict:
    options = body.get("options") or {}
    if not isinstance(options, dict):
        raise ValidationError("options must be an object")
    config = _rolling_config(options)
    kind = resolve_model_kind(str(_require(body, "model")), series, config)
    fit = fit_model(
        series, kind,
        log_offset=config.log_offset, max_ar_order=config.max_ar_order,
    )
    horizon = _int_field(options, "forecast", 0, 0)
    forecast_result = forecast(fit, series, horizon) if horizon else None
    return report.fit_bundle(fit, series, forecast_result)


def _rolling_response(series: MonthlySeries, body: dict) -> dict:
    config = _rolling_config(body)
    model_name = str(_require(body, "model"))
    if model_name == "all":
        selection = select_model(series, config)
        rolling_results = {
            model_label(kind): report.rolling_result_dict(result)
            for kind, result in selection.candidate_results.items()
        }
        if selection.corrected_result is not None:
            label = model_label(ArCorrected(selection.base_choice))
            rolling_results[label] = report.rolling_result_dict(
                selection.corrected_result
            )
        return {
            "schema_version": report.SCHEMA_VERSION,
            "region": series.region,
            "rolling_results": rolling_results,
            "selection": report.selection_bundle(selection, series),
        }
    kind = resolve_model_kind(model_name, series, config)
    result = rolling_forecast(
        series, kind,
        min_train=config.min_train, horizon=config.horizon,
        mode=config.mode, log_offset=config.log_offset,
        max_ar_order=config.max_ar_order,
    )
    return report.rolling_bundle(result, series)


def _estimated_windows(series: MonthlySeries, body: dict, config: SelectionConfig) -> int:
    per_model = max(0, len(series) - config.min_train)
    n_models = 5 if body.get("model") == "all" else 1
    return per_model * n_models


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="epiforecast service", docs_url=None, redoc_url=None)
    store = SessionStore(
        config.session_ttl_seconds, clock=config.clock, persist_dir=config.persist_dir
    )
    jobs = JobStore()
    app.state.store = store
    app.state.jobs = jobs
    app.state.config = config

    @app.exception_handler(EpiForecastError)
    async def _handle_domain_error(request: Request, exc: EpiForecastError):
        return _error_response(exc)

    @app.get("/healthz")
    def healthz():
        return _canonical_response(
            {"schema_version": report.SCHEMA_VERSION, "status": "ok"}
        )

    @app.post("/api/datasets")
    async def upload_dataset(file: UploadFile = File(...)):
        raw = await file.read()
        if len(raw) > config.max_upload_bytes:
            raise UploadTooLargeError(
                f"upload of {len(raw)} bytes exceeds the "
                f"{config.max_upload_bytes} byte limit"
            )
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataFormatError(f"CSV is not valid UTF-8: {exc}") from exc
        dataset = parse_csv(text)
        session = store.create(dataset)
        return _canonical_response(_dataset_summary(session))

    @app.get("/api/sessions/{session_id}/regions")
    def list_regions(session_id: str):
        session = store.get(session_id)
        return _canonical_response(_dataset_summary(session))

    @app.post("/api/sessions/{session_id}/fit")
    async def fit_endpoint(session_id: str, request: Request):
        session = store.get(session_id)
        body = await _json_body(request)
        series = _get_series(session, str(_require(body, "region")))
        return _canonical_response(_fit_response(series, body))

    @app.post("/api/sessions/{session_id}/rolling")
    async def rolling_endpoint(session_id: str, request: Request):
        session = store.get(session_id)
        body = await _json_body(request)
        series = _get_series(session, str(_require(body, "region")))
        config_for_run = _rolling_config(body)
        model_name = str(_require(body, "model"))
        if model_name != "all":
            parse_model_name(model_name)  # reject bad names before job dispatch
        if _estimated_windows(series, body, config_for_run) > config.job_window_threshold:
            job = jobs.start(lambda: _rolling_response(series, body))
            return _canonical_response(
                {
                    "schema_version": report.SCHEMA_VERSION,
                    "job_id": job.id,
                    "status": job.status,
                },
                status_code=202,
            )
        return _canonical_response(_rolling_response(series, body))

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        return _canonical_response(jobs.snapshot(job_id))

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except json.JSONDecodeError as exc:
        raise ValidationError(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    return body
