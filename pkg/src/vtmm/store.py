"""Persistent project state.

A project directory holds a project.json manifest, an append-only
revisions/ directory of full annotation snapshots (one JSON file per
revision, never rewritten), and paths to the dataset, checkpoint and
sentence-vector files it was configured with. Every annotation edit
appends a new revision, so any historical evaluation can be reproduced
exactly by re-running against that revision's snapshot.

Writers take an advisory lock file; readers never need it.
"""

from __future__ import annotations

import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import ConcurrentWrite, CorruptProject, UnknownRevision, ValidationFailed
from .scoring import AnnotationSet

logger = logging.getLogger("vtmm.store")

MANIFEST_NAME = "project.json"
REVISIONS_DIR = "revisions"
LOCK_NAME = ".lock"
MANIFEST_FORMAT = 1

DEFAULT_CONFIG = {
    "mode": "literal",
    "lambda": 1.0,
    "match_threshold": 0.5,
    "seed": 0,
    "normalize_baseline": "none",
}


@dataclass
class AnnotationRevision:
    revision: int
    parent: int | None
    timestamp: str
    note: str
    annotations: AnnotationSet

    def to_dict(self) -> dict:
        return {
            "revision": self.revision,
            "parent": self.parent,
            "timestamp": self.timestamp,
            "note": self.note,
            "annotations": self.annotations.to_dict(),
        }


@dataclass
class Project:
    root: Path
    active_revision: int
    dataset: str | None = None
    checkpoint: str | None = None
    embeddings: str | None = None
    config: dict = field(default_factory=lambda: dict(DEFAULT_CONFIG))

    def resolve(self, stored: str | None) -> Path | None:
        if stored is None:
            return None
        p = Path(stored)
        return p if p.is_absolute() else self.root / p

    def store_path(self, target: str | Path) -> str:
        """Keep user-given absolute paths absolute; make others project-relative."""
        target = Path(target)
        if target.is_absolute():
            return str(target)
        return os.path.relpath(target.resolve(), self.root.resolve())


def _revision_path(root: Path, revision: int) -> Path:
    return root / REVISIONS_DIR / f"{revision:04d}.json"


@contextmanager
def write_lock(root: Path):
    """Advisory single-writer lock."""
    lock = root / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConcurrentWrite(f"{lock}: another writer holds the project lock")
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(lock)
        except FileNotFoundError:
            pass


def _write_manifest(project: Project) -> None:
    payload = {
        "format": MANIFEST_FORMAT,
        "active_revision": project.active_revision,
        "dataset": project.dataset,
        "checkpoint": project.checkpoint,
        "embeddings": project.embeddings,
        "config": project.config,
    }
    with open(project.root / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_revision(root: Path, rev: AnnotationRevision) -> None:
    path = _revision_path(root, rev.revision)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rev.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def open_or_init(path: str | Path) -> Project:
    """Load the project at `path`, or initialize a fresh one with an empty
    revision 0 if the directory has no manifest yet."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = root / MANIFEST_NAME
    if not manifest.exists():
        project = Project(root=root, active_revision=0)
        rev = AnnotationRevision(
            revision=0,
            parent=None,
            timestamp=datetime.now(timezone.utc).isoformat(),
            note="project initialized",
            annotations=AnnotationSet(),
        )
        with write_lock(root):
            _write_revision(root, rev)
            _write_manifest(project)
        logger.info("initialized project at %s", root)
        return project

    try:
        with open(manifest, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        project = Project(
            root=root,
            active_revision=int(data["active_revision"]),
            dataset=data.get("dataset"),
            checkpoint=data.get("checkpoint"),
            embeddings=data.get("embeddings"),
            config={**DEFAULT_CONFIG, **data.get("config", {})},
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptProject(f"{manifest}: {exc}") from exc
    # The active revision must be loadable, or the project is unusable.
    get_revision(project, project.active_revision)
    return project


def get_revision(project: Project, revision: int) -> AnnotationRevision:
    path = _revision_path(project.root, revision)
    if not path.exists():
        raise UnknownRevision(f"revision {revision} does not exist")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return AnnotationRevision(
            revision=int(data["revision"]),
            parent=data.get("parent"),
            timestamp=data["timestamp"],
            note=data.get("note", ""),
            annotations=AnnotationSet.from_dict(data["annotations"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptProject(f"{path}: {exc}") from exc


def list_revisions(project: Project) -> list[dict]:
    rev_dir = project.root / REVISIONS_DIR
    out = []
    for path in sorted(rev_dir.glob("*.json")):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            out.append(
                {
                    "revision": int(data["revision"]),
                    "parent": data.get("parent"),
                    "timestamp": data["timestamp"],
                    "note": data.get("note", ""),
                }
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorruptProject(f"{path}: {exc}") from exc
    return sorted(out, key=lambda r: r["revision"])


def active_annotations(project: Project) -> AnnotationSet:
    return get_revision(project, project.active_revision).annotations


def commit_annotations(project: Project, snapshot: AnnotationSet, note: str = "") -> int:
    """Append the snapshot as a new revision and make it active.

    Committing an unchanged snapshot still creates a revision: history is
    explicit. Prior revision files are never touched.
    """
    problems = snapshot.validate()
    if problems:
        raise ValidationFailed(problems)
    existing = list_revisions(project)
    new_id = existing[-1]["revision"] + 1 if existing else 0
    rev = AnnotationRevision(
        revision=new_id,
        parent=project.active_revision if existing else None,
        timestamp=datetime.now(timezone.utc).isoformat(),
        note=note,
        annotations=snapshot,
    )
    with write_lock(project.root):
        _write_revision(project.root, rev)
        project.active_revision = new_id
        _write_manifest(project)
    logger.info("committed revision %d (%s)", new_id, note or "no note")
    return new_id


def update_paths(
    project: Project,
    dataset: str | Path | None = None,
    checkpoint: str | Path | None = None,
    embeddings: str | Path | None = None,
    config: dict | None = None,
) -> None:
    changed = False
    if dataset is not None:
        project.dataset = project.store_path(dataset)
        changed = True
    if checkpoint is not None:
        project.checkpoint = project.store_path(checkpoint)
        changed = True
    if embeddings is not None:
        project.embeddings = project.store_path(embeddings)
        changed = True
    if config:
        project.config.update(config)
        changed = True
    if changed:
        with write_lock(project.root):
            _write_manifest(project)


def diff(project: Project, rev_a: int, rev_b: int) -> list[dict]:
    """Per-class changes from rev_a to rev_b, keyed by (text, kind).

    A feature present in both with a different weight is reported as a
    weight change, not as an add plus a remove.
    """
    a = get_revision(project, rev_a).annotations
    b = get_revision(project, rev_b).annotations
    out = []
    for label in sorted(set(a.classes) | set(b.classes)):
        feats_a = {(f.text, f.kind): f for f in a.classes.get(label, [])}
        feats_b = {(f.text, f.kind): f for f in b.classes.get(label, [])}
        added = [feats_b[k] for k in sorted(feats_b.keys() - feats_a.keys())]
        removed = [feats_a[k] for k in sorted(feats_a.keys() - feats_b.keys())]
        weight_changes = [
            {"text": k[0], "kind": k[1], "from": feats_a[k].weight, "to": feats_b[k].weight}
            for k in sorted(feats_a.keys() & feats_b.keys())
            if feats_a[k].weight != feats_b[k].weight
        ]
        if added or removed or weight_changes:
            out.append(
                {
                    "class_label": label,
                    "added": [{"text": f.text, "weight": f.weight, "kind": f.kind} for f in added],
                    "removed": [{"text": f.text, "weight": f.weight, "kind": f.kind} for f in removed],
                    "weight_changes": weight_changes,
                }
            )
    return out
