"""HTTP service: asynchronous generation jobs, polling, and sync admin.

Endpoints (JSON over HTTP):
  POST /api/generate       {abstract, breadth?, depth?, diversity?} -> {job_id}
  POST /api/generate-pdf   multipart file + params                  -> {job_id}
  POST /api/question       {question, abstract, ...}                -> {job_id}
  GET  /api/jobs/{id}                                               -> job view
  POST /api/sync           {snapshot, batch_size?, dry_run?}        -> SyncReport

Errors use the envelope ``{"error": {"code", "message", "field"?}}``. Jobs
run on a small worker pool, advance through a fixed forward state chain,
and persist to disk as one JSON file per job.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, File, Form, Header, Request, UploadFile
from fastapi.responses import JSONResponse

from . import sync as sync_mod
from .config import AppConfig
from .errors import RefsynthError, ValidationError
from .fulltext import extract_document
from .pipeline import PipelineConfig, generate_related_work
from .selection import GenerationParams
from .synthesis import LlmConfig

logger = logging.getLogger(__name__)

JOB_STATES = (
    "queued",
    "retrieving",
    "filtering",
    "summarizing",
    "synthesizing",
    "done",
    "failed",
)


@dataclass
class Job:
    job_id: str
    state: str = "queued"
    params: GenerationParams = field(default_factory=GenerationParams)
    submitted_at: str = ""
    updated_at: str = ""
    result: dict | None = None
    error: str | None = None
    progress_note: str = ""

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "state": self.state,
            "params": {
                "breadth": self.params.breadth,
                "depth": self.params.depth,
                "diversity": self.params.diversity,
            },
            "submitted_at": self.submitted_at,
            "updated_at": self.updated_at,
            "result": self.result,
            "error": self.error,
            "progress_note": self.progress_note,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class JobManager:
    """Runs jobs on a bounded worker pool and persists them to disk."""

    def __init__(self, backends, config: AppConfig):
        self.backends = backends  # object with store/embedder/llm/llm_config/fetcher
        self.config = config
        self.jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=config.worker_slots)
        self._job_dir = Path(config.job_dir)
        self._job_dir.mkdir(parents=True, exist_ok=True)
        self.sync_running = threading.Lock()

    def submit(
        self,
        params: GenerationParams,
        abstract: str | None = None,
        input_pages: list[str] | None = None,
        mode: str = "related-work",
        question: str | None = None,
    ) -> Job:
        with self._lock:
            active = sum(1 for j in self.jobs.values() if j.state not in ("done", "failed"))
            if active >= self.config.max_queue:
                raise RefsynthError("job queue is full, retry later")
            job = Job(job_id=str(uuid.uuid4()), params=params)
            job.submitted_at = job.updated_at = _now()
            self.jobs[job.job_id] = job
        self._persist(job)
        self._pool.submit(self._run, job, abstract, input_pages, mode, question)
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            job = self.jobs.get(job_id)
        if job is not None:
            return job
        path = self._job_dir / f"{job_id}.json"
        if path.exists():
            data = json.loads(path.read_text("utf-8"))
            job = Job(
                job_id=data["job_id"],
                state=data["state"],
                params=GenerationParams(**data["params"]),
                submitted_at=data["submitted_at"],
                updated_at=data["updated_at"],
                result=data.get("result"),
                error=data.get("error"),
                progress_note=data.get("progress_note", ""),
            )
            return job
        return None

    def expire_old_jobs(self) -> int:
        """Delete persisted jobs older than the configured TTL."""
        cutoff = time.time() - self.config.job_ttl_days * 86400
        removed = 0
        for path in self._job_dir.glob("*.json"):
            if path.stat().st_mtime < cutoff:
                path.unlink()
                removed += 1
        return removed

    def _advance(self, job: Job, state: str, note: str = "") -> None:
        # states only move forward along the canonical chain
        assert JOB_STATES.index(state) >= JOB_STATES.index(job.state)
        job.state = state
        job.progress_note = note
        job.updated_at = _now()
        self._persist(job)

    def _persist(self, job: Job) -> None:
        path = self._job_dir / f"{job.job_id}.json"
        path.write_text(json.dumps(job.to_dict(), indent=2), "utf-8")

    def _run(self, job, abstract, input_pages, mode, question) -> None:
        b = self.backends
        try:
            result = generate_related_work(
                store=b.store,
                embedder=b.embedder,
                llm=b.llm,
                llm_config=b.llm_config,
                fetcher=b.fetcher,
                params=job.params,
                abstract=abstract,
                input_pages=input_pages,
                mode=mode,
                question=question,
                config=PipelineConfig(
                    pool_factor=self.config.pool_factor,
                    shortlist_cap=self.config.shortlist_cap,
                    remote_citation_metadata=not self.config.hermetic,
                ),
                progress=lambda stage, note: self._advance(job, stage, note),
            )
            job.result = result.to_dict()
            self._advance(job, "done", "completed")
        except Exception as exc:
            logger.exception("job %s failed", job.job_id)
            job.error = str(exc) or exc.__class__.__name__
            self._advance(job, "failed", "failed")


@dataclass
class Backends:
    store: object
    embedder: object
    llm: object
    llm_config: LlmConfig
    fetcher: object
    hash_index: object | None = None
    topic_assigner: object = sync_mod.no_topic


def _error_response(status: int, code: str, message: str, field_name: str | None = None):
    err: dict = {"code": code, "message": message}
    if field_name:
        err["field"] = field_name
    return JSONResponse(status_code=status, content={"error": err})


def _parse_params(breadth, depth, diversity) -> GenerationParams:
    try:
        params = GenerationParams(
            breadth=int(breadth), depth=int(depth), diversity=float(diversity)
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed parameter: {exc}", field="params") from exc
    params.validate()
    return params


def _validate_abstract(abstract: str | None) -> str:
    if not abstract or not (200 <= len(abstract) <= 20000):
        raise ValidationError(
            "abstract must be between 200 and 20000 characters", field="abstract"
        )
    return abstract


def create_app(backends: Backends, config: AppConfig) -> FastAPI:
    app = FastAPI(title="refsynth", version="0.1.0")
    manager = JobManager(backends, config)
    app.state.manager = manager
    app.state.config = config

    @app.exception_handler(ValidationError)
    async def _validation_handler(request: Request, exc: ValidationError):
        return _error_response(422, "validation_error", str(exc), exc.field)

    @app.exception_handler(RefsynthError)
    async def _refsynth_handler(request: Request, exc: RefsynthError):
        return _error_response(503, "unavailable", str(exc))

    @app.post("/api/generate")
    async def post_generate(payload: dict):
        abstract = _validate_abstract(payload.get("abstract"))
        params = _parse_params(
            payload.get("breadth", 10),
            payload.get("depth", 2),
            payload.get("diversity", 0.0),
        )
        job = manager.submit(params, abstract=abstract)
        return {"job_id": job.job_id}

    @app.post("/api/generate-pdf")
    async def post_generate_pdf(
        file: UploadFile = File(...),
        breadth: int = Form(10),
        depth: int = Form(2),
        diversity: float = Form(0.0),
    ):
        data = await file.read()
        if len(data) > config.max_upload_bytes:
            raise ValidationError(
                f"upload exceeds the {config.max_upload_bytes} byte limit",
                field="file",
            )
        pages = extract_document(data)  # raises ValidationError before job creation
        params = _parse_params(breadth, depth, diversity)
        job = manager.submit(params, input_pages=pages)
        return {"job_id": job.job_id}

    @app.post("/api/question")
    async def post_question(payload: dict):
        question = payload.get("question")
        if not question or not question.strip():
            raise ValidationError("question must be non-empty", field="question")
        abstract = _validate_abstract(payload.get("abstract"))
        params = _parse_params(
            payload.get("breadth", 10),
            payload.get("depth", 2),
            payload.get("diversity", 0.0),
        )
        job = manager.submit(
            params, abstract=abstract, mode="question-answer", question=question
        )
        return {"job_id": job.job_id}

    @app.get("/api/jobs/{job_id}")
    async def get_job(job_id: str):
        job = manager.get(job_id)
        if job is None:
            return _error_response(404, "not_found", f"unknown job {job_id}")
        return job.to_dict()

    @app.post("/api/sync")
    async def post_sync(payload: dict, x_admin_token: str | None = Header(None)):
        if not config.admin_token or x_admin_token != config.admin_token:
            return _error_response(403, "forbidden", "admin token required")
        snapshot_path = payload.get("snapshot")
        if not snapshot_path or not Path(snapshot_path).exists():
            raise ValidationError("snapshot path missing or unreadable", field="snapshot")
        if not manager.sync_running.acquire(blocking=False):
            return _error_response(409, "conflict", "a sync is already running")
        try:
            with open(snapshot_path, encoding="utf-8") as fh:
                report = sync_mod.reload(
                    fh,
                    backends.store,
                    backends.hash_index,
                    backends.embedder,
                    batch_size=int(payload.get("batch_size", 512)),
                    topic_assigner=backends.topic_assigner,
                    dry_run=bool(payload.get("dry_run", False)),
                )
            if not payload.get("dry_run"):
                backends.store.save(config.store_path)
                backends.hash_index.save(config.hash_index_path)
            return report.to_dict()
        finally:
            manager.sync_running.release()

    frontend_dist = Path("frontend/dist")
    if frontend_dist.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dist), html=True), name="ui")

    return app


def build_hermetic_backends(config: AppConfig, corpus_size: int = 1000) -> Backends:
    """Mock-backed service wiring for tests and demos."""
    from .store import VectorStore
    from .sync import HashIndex, reload
    from .testing import ScriptedLlm, SyntheticFetcher, corpus_jsonl_lines, generate_corpus_records

    store = VectorStore(dim=config.dim)
    index = HashIndex()
    embedder_cls_dim = config.dim
    from .embedding import HashEmbedder

    embedder = HashEmbedder(dim=embedder_cls_dim)
    lines = corpus_jsonl_lines(generate_corpus_records(corpus_size))
    reload(lines, store, index, embedder)
    return Backends(
        store=store,
        embedder=embedder,
        llm=ScriptedLlm(),
        llm_config=LlmConfig(model_id="scripted-mock"),
        fetcher=SyntheticFetcher(store),
        hash_index=index,
    )
