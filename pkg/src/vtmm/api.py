"""HTTP service for the annotation feedback loop.

The service loads one project (dataset, checkpoint, annotation history) at
startup and exposes scoring, evaluation, correction, and annotation
commits over JSON. The network is never mutated here: there is no training
endpoint, by design. Editing features and re-evaluating is the whole
point, and it must be fast, so sentence vectors are cached per revision
and carried forward for texts that didn't change.

Every successful response carries the active revision id. Annotation
writes are serialized and use optimistic concurrency: a commit must name
the revision it was based on and gets 409 if someone else won the race.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import dataset as dsmod
from . import net as netmod
from . import scoring, store
from .embedding import LabelHierarchy, SentenceEmbedder, WordEmbeddingTable
from .errors import (
    ContractError,
    StorageError,
    UnknownRevision,
    ValidationError,
    ValidationFailed,
    VtmmError,
)
from .features import VideoFeature

logger = logging.getLogger("vtmm.api")


@dataclass
class SessionState:
    project: store.Project
    net: netmod.MatchingNetwork
    dataset: dsmod.Dataset
    videos: dict[str, VideoFeature]
    embedder: SentenceEmbedder
    embed_cache: dict[int, dict[str, np.ndarray]] = dc_field(default_factory=dict)
    write_mutex: threading.Lock = dc_field(default_factory=threading.Lock)

    def annotations(self) -> tuple[int, scoring.AnnotationSet]:
        """Active revision id and its snapshot, read together."""
        rev = self.project.active_revision
        return rev, store.get_revision(self.project, rev).annotations

    def cache_for(self, revision: int) -> dict[str, np.ndarray]:
        return self.embed_cache.setdefault(revision, {})

    def roll_cache(self, old_revision: int, new_revision: int, snapshot: scoring.AnnotationSet) -> None:
        """Keep cached vectors for texts that survived the edit."""
        kept_texts = {f.text for feats in snapshot.classes.values() for f in feats}
        old = self.embed_cache.get(old_revision, {})
        self.embed_cache = {
            new_revision: {t: v for t, v in old.items() if t in kept_texts}
        }


def create_session(project_path: str | Path) -> SessionState:
    project = store.open_or_init(project_path)
    if not project.dataset:
        raise ValidationError("project has no dataset configured; run eval/classify with --dataset first")
    if not project.checkpoint:
        raise ValidationError("project has no checkpoint configured; train one and pass --checkpoint")
    ds = dsmod.load_dataset(project.resolve(project.dataset))
    table = hierarchy = None
    if project.config.get("words"):
        table = WordEmbeddingTable.load(project.resolve(project.config["words"]))
    if project.config.get("hierarchy"):
        hierarchy = LabelHierarchy.load(project.resolve(project.config["hierarchy"]))
    videos = dsmod.load_videos(ds, table, hierarchy)
    net = netmod.load_checkpoint(project.resolve(project.checkpoint))
    if project.embeddings:
        embedder = SentenceEmbedder.load_precomputed(project.resolve(project.embeddings))
    else:
        embedder = SentenceEmbedder()
    return SessionState(project=project, net=net, dataset=ds, videos=videos, embedder=embedder)


class ScoreRequest(BaseModel):
    model_config = {"populate_by_name": True}
    video_id: str
    class_label: str | None = Field(default=None, alias="class")


class EvaluateRequest(BaseModel):
    split: str = "all"


class CorrectRequest(BaseModel):
    model_config = {"populate_by_name": True}
    factor: float = Field(default=1.0, alias="lambda")
    baseline_ref: str | None = None
    split: str = "all"
    normalize_baseline: str | None = None


class CommitRequest(BaseModel):
    annotations: dict
    note: str = ""
    parent_revision: int


def _error_body(status: int, code: str, message: str, **extra):
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message, **extra}})


def create_app(state: SessionState) -> FastAPI:
    app = FastAPI(title="vtmm workbench", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return _error_body(400, "MalformedRequest", str(exc))

    @app.exception_handler(ValidationFailed)
    async def _failed(request: Request, exc: ValidationFailed):
        return _error_body(400, "ValidationFailed", str(exc), diagnostics=exc.diagnostics)

    @app.exception_handler(UnknownRevision)
    async def _unknown_rev(request: Request, exc: UnknownRevision):
        return _error_body(404, "UnknownRevision", str(exc))

    @app.exception_handler(ValidationError)
    async def _validation(request: Request, exc: ValidationError):
        return _error_body(400, type(exc).__name__, str(exc))

    @app.exception_handler(ContractError)
    async def _contract(request: Request, exc: ContractError):
        return _error_body(500, type(exc).__name__, str(exc))

    @app.exception_handler(StorageError)
    async def _storage(request: Request, exc: StorageError):
        return _error_body(500, type(exc).__name__, str(exc))

    @app.exception_handler(VtmmError)
    async def _other(request: Request, exc: VtmmError):
        return _error_body(500, type(exc).__name__, str(exc))

    def video_split(video_id: str) -> str | None:
        entry = state.dataset.entry(video_id)
        return entry.split if entry else None

    def videos_for_split(split: str) -> dict[str, VideoFeature]:
        if split == "all":
            return state.videos
        return {vid: v for vid, v in state.videos.items() if video_split(vid) == split}

    @app.get("/v1/project")
    def project_info():
        rev, snapshot = state.annotations()
        return {
            "revision": rev,
            "config": state.project.config,
            "video_count": len(state.videos),
            "class_count": len(snapshot.classes),
            "splits": sorted({e.split for e in state.dataset.entries if e.split}),
        }

    @app.get("/v1/classes")
    def classes():
        rev, snapshot = state.annotations()
        labels = sorted(
            {e.class_label for e in state.dataset.entries if e.class_label} | set(snapshot.classes)
        )
        return {
            "revision": rev,
            "classes": [
                {"label": label, "feature_count": len(snapshot.classes.get(label, []))}
                for label in labels
            ],
        }

    @app.get("/v1/annotations")
    def get_annotations():
        rev, snapshot = state.annotations()
        return {"revision": rev, "annotations": snapshot.to_dict()}

    @app.put("/v1/annotations")
    def put_annotations(body: CommitRequest):
        try:
            snapshot = scoring.AnnotationSet.from_dict(body.annotations)
        except StorageError as exc:
            # a snapshot that does not even parse is the caller's problem
            return _error_body(400, "MalformedSnapshot", str(exc))
        with state.write_mutex:
            active = state.project.active_revision
            if body.parent_revision != active:
                return _error_body(
                    409,
                    "RevisionConflict",
                    f"commit based on revision {body.parent_revision}, but {active} is active",
                    revision=active,
                )
            new_rev = store.commit_annotations(state.project, snapshot, body.note)
            state.roll_cache(active, new_rev, snapshot)
        return {"revision": new_rev, "parent": active}

    @app.post("/v1/score")
    def score(body: ScoreRequest):
        rev, snapshot = state.annotations()
        video = state.videos.get(body.video_id)
        if video is None:
            return _error_body(404, "UnknownVideo", f"video {body.video_id!r} not in dataset", revision=rev)
        annotations = snapshot
        if body.class_label is not None:
            if body.class_label not in snapshot.classes:
                return _error_body(
                    404, "UnknownClass", f"class {body.class_label!r} has no annotations", revision=rev
                )
            annotations = scoring.AnnotationSet(
                classes={body.class_label: snapshot.classes[body.class_label]},
                common_features=snapshot.common_features,
            )
        ranking = scoring.classify_standalone(
            video, annotations, state.net, state.embedder,
            mode=state.project.config.get("mode", "literal"),
            embed_cache=state.cache_for(rev),
        )
        return {
            "revision": rev,
            "video_id": body.video_id,
            "scores": [b.to_dict() for b in ranking],
        }

    @app.post("/v1/evaluate")
    def evaluate(body: EvaluateRequest):
        rev, snapshot = state.annotations()
        report = scoring.build_standalone_report(
            videos_for_split(body.split),
            snapshot,
            state.net,
            state.embedder,
            mode=state.project.config.get("mode", "literal"),
            revision=rev,
            split=body.split,
            embed_cache=state.cache_for(rev),
        )
        return report

    @app.post("/v1/correct")
    def correct(body: CorrectRequest):
        rev, snapshot = state.annotations()
        ref = body.baseline_ref or state.project.config.get("baseline_ref")
        if not ref:
            return _error_body(400, "MissingBaseline", "no baseline_ref given or configured", revision=rev)
        baseline_path = state.project.resolve(ref)
        if not Path(baseline_path).exists():
            return _error_body(404, "UnknownBaseline", f"baseline file {ref!r} not found", revision=rev)
        baseline = dsmod.load_baseline_scores(baseline_path)
        report = scoring.build_corrected_report(
            videos_for_split(body.split),
            snapshot,
            state.net,
            state.embedder,
            baseline,
            factor=body.factor,
            mode=state.project.config.get("mode", "literal"),
            normalize_baseline=body.normalize_baseline
            or state.project.config.get("normalize_baseline", "none"),
            revision=rev,
            split=body.split,
            embed_cache=state.cache_for(rev),
        )
        return report

    @app.get("/v1/revisions")
    def revisions():
        return {
            "revision": state.project.active_revision,
            "revisions": store.list_revisions(state.project),
        }

    @app.get("/v1/revisions/{rev_a}/diff/{rev_b}")
    def revision_diff(rev_a: int, rev_b: int):
        changes = store.diff(state.project, rev_a, rev_b)
        return {
            "revision": state.project.active_revision,
            "rev_a": rev_a,
            "rev_b": rev_b,
            "changes": changes,
        }

    return app


def serve(project_path: str | Path, host: str = "127.0.0.1", port: int = 8321,
          ui_dir: str | Path | None = None) -> None:
    import uvicorn

    state = create_session(project_path)
    app = create_app(state)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    logger.info("serving project %s on %s:%d", project_path, host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
