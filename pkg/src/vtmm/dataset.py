"""Dataset files on disk.

A dataset is a directory of per-video JSON feature files plus an
index.json listing ids, class labels, and (optionally) a train/test split.
A feature file carries either a pre-assembled 2480-vector or the raw
per-frame inputs:

  { "video_id": "...", "class_label": "...",
    "assembled": [2480 floats] }
  { "video_id": "...", "class_label": "...",
    "raw": { "visual_frames": [[1024]...],
             "object_frames": [{label: prob}...],
             "skeleton": [256 floats] } }

Caption files are a JSON list of {video_id, class_label, captions}.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import features as ft
from .embedding import LabelHierarchy, WordEmbeddingTable
from .errors import StorageError, ValidationError

logger = logging.getLogger("vtmm.dataset")

INDEX_NAME = "index.json"


@dataclass
class IndexEntry:
    video_id: str
    class_label: str | None
    file: str
    split: str | None = None


@dataclass
class Dataset:
    root: Path
    entries: list[IndexEntry] = field(default_factory=list)

    def class_labels(self) -> list[str]:
        return sorted({e.class_label for e in self.entries if e.class_label is not None})

    def ids(self, split: str | None = None) -> list[str]:
        return [e.video_id for e in self.entries if split in (None, "all") or e.split == split]

    def entry(self, video_id: str) -> IndexEntry | None:
        for e in self.entries:
            if e.video_id == video_id:
                return e
        return None


def write_feature_file(path: str | Path, video: ft.VideoFeature) -> None:
    payload = {
        "video_id": video.video_id,
        "assembled": [float(v) for v in video.vector],
    }
    if video.class_label is not None:
        payload["class_label"] = video.class_label
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def read_feature_file(
    path: str | Path,
    table: WordEmbeddingTable | None = None,
    hierarchy: LabelHierarchy | None = None,
) -> ft.VideoFeature:
    """Load one per-video file; raw files are assembled on the fly."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise StorageError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "video_id" not in data:
        raise StorageError(f"{path}: feature file must be a JSON object with a video_id")
    video_id = data["video_id"]
    class_label = data.get("class_label")
    if "assembled" in data:
        arr = np.asarray(data["assembled"], dtype=np.float64)
        if arr.ndim != 1 or not np.isfinite(arr).all():
            raise StorageError(f"{path}: assembled vector must be a flat list of finite numbers")
        return ft.VideoFeature.from_vector(arr, video_id, class_label)
    if "raw" in data:
        raw = data["raw"]
        if table is None or hierarchy is None:
            raise ValidationError(
                f"{path}: raw feature file needs a word-vector table and a label hierarchy to assemble"
            )
        visual = [np.asarray(f, dtype=np.float64) for f in raw["visual_frames"]]
        return ft.assemble(
            frames_visual=visual,
            frames_objects=raw["object_frames"],
            skeleton=raw["skeleton"],
            table=table,
            hierarchy=hierarchy,
            video_id=video_id,
            class_label=class_label,
        )
    raise StorageError(f"{path}: feature file has neither 'assembled' nor 'raw'")


def write_index(root: str | Path, entries: list[IndexEntry]) -> None:
    payload = {
        "format": 1,
        "videos": [
            {k: v for k, v in
             [("video_id", e.video_id), ("class_label", e.class_label),
              ("file", e.file), ("split", e.split)]
             if v is not None}
            for e in sorted(entries, key=lambda e: e.video_id)
        ],
    }
    with open(Path(root) / INDEX_NAME, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_dataset(root: str | Path) -> Dataset:
    root = Path(root)
    index_path = root / INDEX_NAME
    try:
        with open(index_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise StorageError(f"{index_path}: dataset index not found")
    except json.JSONDecodeError as exc:
        raise StorageError(f"{index_path}: not valid JSON: {exc}") from exc
    entries = [
        IndexEntry(
            video_id=v["video_id"],
            class_label=v.get("class_label"),
            file=v["file"],
            split=v.get("split"),
        )
        for v in data.get("videos", [])
    ]
    return Dataset(root=root, entries=entries)


def load_videos(
    ds: Dataset,
    table: WordEmbeddingTable | None = None,
    hierarchy: LabelHierarchy | None = None,
) -> dict[str, ft.VideoFeature]:
    videos = {}
    for entry in ds.entries:
        video = read_feature_file(ds.root / entry.file, table, hierarchy)
        if video.video_id != entry.video_id:
            raise StorageError(
                f"{entry.file}: video_id {video.video_id!r} disagrees with index entry {entry.video_id!r}"
            )
        if video.class_label is None and entry.class_label is not None:
            video = ft.VideoFeature.from_vector(video.vector, video.video_id, entry.class_label)
        videos[entry.video_id] = video
    return videos


def load_captions(path: str | Path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise StorageError(f"{path}: captions file must be a JSON list")
    for item in data:
        if not {"video_id", "class_label", "captions"} <= set(item):
            raise StorageError(f"{path}: caption entries need video_id, class_label and captions")
    return data


def write_captions(path: str | Path, items: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(items, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_baseline_scores(path: str | Path) -> dict[str, dict[str, float]]:
    """{video_id: {class: score}} as produced by some other classifier."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise StorageError(f"{path}: baseline scores must be a JSON object")
    for vid, scores in data.items():
        if not isinstance(scores, dict) or not scores:
            raise StorageError(f"{path}: baseline entry for {vid!r} must be a non-empty class->score map")
    return data
