"""HTTP/JSON service: evaluation endpoint and annotation sessions.

All endpoints live under /v1 and every response carries a schema_version
field. Non-2xx responses carry exactly one error object {code, message,
detail}. Session state is an append-only directory store, so a restart
loses no committed annotation. When CORPUSFORGE_TOKEN is set, requests
(except /v1/health) must send it in the X-Auth-Token header.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from corpusforge.errors import CorpusForgeError, DataError
from corpusforge.humaneval import (
    SessionStore,
    aggregate_errors,
    build_eval_set,
    kappa_per_error_type,
    mqm_penalty,
    next_item,
    sqm_summary,
)
from corpusforge.metrics import MetricOptions, evaluate_all

SCHEMA_VERSION = "v1"


def _ok(payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **payload}


def _error(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "schema_version": SCHEMA_VERSION,
            "error": {"code": code, "message": message, "detail": detail},
        },
    )


class EvaluateRequest(BaseModel):
    hyps: list[str]
    refs: list[str]
    lowercase: bool = False
    sentence_level: bool = False
    chrf_beta: int = 3
    smoothing: str = "none"


class CreateSessionRequest(BaseModel):
    corpus: list[tuple[str, str]] = Field(description="(source, reference) pairs")
    systems: dict[str, list[str]]
    n: int
    seed: int = 0
    session_id: str = "session"


class AnnotationRequest(BaseModel):
    session: str
    segment_id: str
    blind_label: str
    annotator: str
    kind: str
    category: str | None = None
    sub_category: str | None = None
    severity: str | None = None
    level: int | None = None
    span: tuple[int, int] | None = None
    note: str = ""


def create_app(data_root: str | Path | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    data_root = Path(data_root or os.environ.get("CORPUSFORGE_DATA", "corpusforge-data"))
    store = SessionStore(data_root / "sessions")
    app = FastAPI(title="corpusforge gateway", version=SCHEMA_VERSION)

    token = os.environ.get("CORPUSFORGE_TOKEN")

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if (
            token
            and request.url.path.startswith("/v1")
            and request.url.path != "/v1/health"
            and request.headers.get("X-Auth-Token") != token
        ):
            return _error(401, "unauthorized", "missing or bad X-Auth-Token header")
        return await call_next(request)

    @app.exception_handler(CorpusForgeError)
    async def forge_error(request: Request, exc: CorpusForgeError):
        message = str(exc)
        if "unknown session" in message or "unknown segment" in message:
            return _error(404, "not_found", message)
        return _error(422, "invalid", message)

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return _error(422, "invalid_request", "request body failed validation",
                      detail=str(exc.errors()))

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception):
        # even unexpected failures keep the one-ApiError-per-response contract
        return _error(500, "internal", "internal server error",
                      detail=exc.__class__.__name__)

    @app.get("/v1/health")
    async def health():
        return _ok({"status": "ok"})

    @app.post("/v1/evaluate")
    async def evaluate(req: EvaluateRequest):
        opts = MetricOptions(
            lowercase=req.lowercase,
            sentence_level=req.sentence_level,
            chrf_beta=req.chrf_beta,
            smoothing=req.smoothing,
        )
        report = evaluate_all(req.hyps, req.refs, opts)
        return _ok({"report": report.to_dict()})

    @app.post("/v1/sessions", status_code=201)
    async def create_session(req: CreateSessionRequest):
        session = build_eval_set(
            req.corpus, req.systems, req.n, req.seed, session_id=req.session_id
        )
        store.create(session)
        return _ok({
            "session_id": session.session_id,
            "n_items": len(session.items),
            "n_systems": len(session.systems),
        })

    @app.get("/v1/sessions/{session_id}/next")
    async def session_next(session_id: str, annotator: str):
        if not annotator:
            raise DataError("annotator query parameter is required")
        session = store.load(session_id)
        records = store.records(session_id)
        item, progress = next_item(session, records, annotator)
        if item is None:
            return _ok({
                "done": True,
                "progress": progress,
                "report_url": f"/v1/sessions/{session_id}/report",
            })
        return _ok({"done": False, "progress": progress, "item": item})

    @app.post("/v1/annotations", status_code=201)
    async def post_annotation(req: AnnotationRequest):
        record = {k: v for k, v in req.model_dump().items() if v is not None}
        if record.get("span") is not None:
            record["span"] = list(record["span"])
        store.append_record(record)
        return _ok({"accepted": True})

    @app.get("/v1/sessions/{session_id}/report")
    async def session_report(session_id: str):
        return _ok({"report": build_session_report(store, session_id)})

    if ui_dir is None:
        ui_dir = os.environ.get("CORPUSFORGE_UI_DIR")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def build_session_report(store: SessionStore, session_id: str) -> dict:
    """Aggregates, penalties, agreement and SQM summary for one session.

    The same function backs the CLI reports, so both paths always agree.
    """
    session = store.load(session_id)
    mqm, sqm = store.resolved(session_id)
    sources = {item.segment_id: item.source for item in session.items}
    report: dict = {
        "session_id": session_id,
        "systems": session.systems,
        "n_items": len(session.items),
        "error_counts": aggregate_errors(mqm),
        "mqm": {
            system: mqm_penalty(mqm, system, sources)
            for system in session.systems
        },
        "sqm": sqm_summary(sqm) if sqm else None,
    }
    coverage = store.coverage(session_id)
    annotators = sorted(coverage)
    if len(annotators) == 2:
        a, b = annotators
        try:
            kappa = kappa_per_error_type(
                [x for x in mqm if x.annotator_id == a],
                [x for x in mqm if x.annotator_id == b],
                session,
                coverage_a=coverage[a],
                coverage_b=coverage[b],
            )
            report["kappa"] = {
                "annotators": [a, b],
                "per_error_type": {k: v.to_dict() for k, v in kappa.items()},
            }
        except DataError as exc:
            report["kappa"] = None
            report["kappa_note"] = str(exc)
    else:
        report["kappa"] = None
        report["kappa_note"] = (
            f"agreement needs exactly 2 annotators with full coverage,"
            f" found {len(annotators)}"
        )
    return report


def serve_api(port: int, data_root: str | Path,
              host: str = "127.0.0.1", ui_dir: str | Path | None = None) -> None:
    """Run the gateway under uvicorn (blocking)."""
    import uvicorn

    app = create_app(data_root, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
