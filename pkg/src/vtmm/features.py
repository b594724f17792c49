"""Video feature assembly.

A video is represented by a 2480-wide vector, the concatenation of three
parts in fixed order:

  * object part, 1200 = 4 x 300: word vectors of the four object labels
    with the highest frame-averaged detection probability;
  * skeleton part, 256: motion feature taken as-is from the skeleton model;
  * visual part, 1024: arithmetic mean of the per-frame visual vectors.

All inputs are precomputed by external extractors; nothing here touches
raw video.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import WORD_DIM, LabelHierarchy, WordEmbeddingTable, resolve_with_fallback
from .errors import EmptyFrameList, TooFewObjects

VISUAL_DIM = 1024
SKELETON_DIM = 256
TOP_K_OBJECTS = 4
OBJECT_DIM = TOP_K_OBJECTS * WORD_DIM
VIDEO_DIM = OBJECT_DIM + SKELETON_DIM + VISUAL_DIM  # 2480


@dataclass(frozen=True)
class VideoFeature:
    """One video's assembled feature, parts ordered [object | skeleton | visual]."""

    video_id: str
    object_part: np.ndarray
    skeleton_part: np.ndarray
    visual_part: np.ndarray
    class_label: str | None = None

    def __post_init__(self):
        if self.object_part.shape != (OBJECT_DIM,):
            raise ValueError(f"object part has shape {self.object_part.shape}, expected ({OBJECT_DIM},)")
        if self.skeleton_part.shape != (SKELETON_DIM,):
            raise ValueError(f"skeleton part has shape {self.skeleton_part.shape}, expected ({SKELETON_DIM},)")
        if self.visual_part.shape != (VISUAL_DIM,):
            raise ValueError(f"visual part has shape {self.visual_part.shape}, expected ({VISUAL_DIM},)")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.object_part, self.skeleton_part, self.visual_part])

    @classmethod
    def from_vector(cls, vec, video_id: str, class_label: str | None = None) -> "VideoFeature":
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (VIDEO_DIM,):
            raise ValueError(f"assembled vector has shape {arr.shape}, expected ({VIDEO_DIM},)")
        return cls(
            video_id=video_id,
            object_part=arr[:OBJECT_DIM],
            skeleton_part=arr[OBJECT_DIM : OBJECT_DIM + SKELETON_DIM],
            visual_part=arr[OBJECT_DIM + SKELETON_DIM :],
            class_label=class_label,
        )


def average_visual(frames: list[np.ndarray]) -> np.ndarray:
    """Component-wise mean of the per-frame 1024-vectors."""
    if len(frames) == 0:
        raise EmptyFrameList("cannot average zero visual frames")
    stack = np.asarray(frames, dtype=np.float64)
    if stack.ndim != 2 or stack.shape[1] != VISUAL_DIM:
        raise ValueError(f"visual frames must each have {VISUAL_DIM} values, got shape {stack.shape}")
    if not np.isfinite(stack).all():
        raise ValueError("visual frames contain non-finite values")
    return stack.mean(axis=0)


def top_objects(frames: list[dict[str, float]], k: int = TOP_K_OBJECTS) -> list[tuple[str, float]]:
    """Top-k object labels by frame-averaged probability.

    A label absent from a frame counts as probability 0 in that frame.
    Ties break by lexicographic label order so output is deterministic.
    """
    if len(frames) == 0:
        raise EmptyFrameList("cannot rank objects over zero frames")
    totals: dict[str, float] = {}
    for frame in frames:
        if not frame:
            raise ValueError("object frame has no entries")
        for label, prob in frame.items():
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"probability for {label!r} is {prob}, outside [0, 1]")
            totals[label] = totals.get(label, 0.0) + prob
    if len(totals) < k:
        raise TooFewObjects(f"need at least {k} distinct labels, union has {len(totals)}")
    n = len(frames)
    ranked = sorted(totals.items(), key=lambda item: (-item[1] / n, item[0]))
    return [(label, total / n) for label, total in ranked[:k]]


def assemble(
    frames_visual: list[np.ndarray],
    frames_objects: list[dict[str, float]],
    skeleton,
    table: WordEmbeddingTable,
    hierarchy: LabelHierarchy,
    video_id: str,
    class_label: str | None = None,
) -> VideoFeature:
    """Build the full 2480-wide feature from per-frame inputs."""
    visual = average_visual(frames_visual)
    ranked = top_objects(frames_objects, TOP_K_OBJECTS)
    pieces = []
    for label, _ in ranked:
        _, vec = resolve_with_fallback(table, hierarchy, label)
        pieces.append(vec)
    object_part = np.concatenate(pieces)
    skeleton_arr = np.asarray(skeleton, dtype=np.float64)
    if skeleton_arr.shape != (SKELETON_DIM,):
        raise ValueError(f"skeleton feature has shape {skeleton_arr.shape}, expected ({SKELETON_DIM},)")
    if not np.isfinite(skeleton_arr).all():
        raise ValueError("skeleton feature contains non-finite values")
    return VideoFeature(
        video_id=video_id,
        object_part=object_part,
        skeleton_part=skeleton_arr,
        visual_part=visual,
        class_label=class_label,
    )
