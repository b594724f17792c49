"""Pretraining pairs and synthetic desk-scale datasets.

Positive pairs combine a video with each of its own captions (label 1);
negative pairs combine a uniformly drawn video with a caption drawn
uniformly from all other classes (label 0), generated in equal number and
with replacement. The synthetic generator builds linearly separable
datasets: one video prototype and one text prototype per class, with
Gaussian noise around both.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset as ds
from .embedding import SENTENCE_DIM, save_sentence_vectors
from .errors import SingleClassDataset
from .features import VIDEO_DIM, VideoFeature

logger = logging.getLogger("vtmm.pairs")


@dataclass(frozen=True)
class CaptionedVideo:
    video_id: str
    class_label: str
    captions: tuple[str, ...]

    def __post_init__(self):
        if not self.class_label:
            raise ValueError("class_label must be nonempty")
        if len(self.captions) == 0:
            raise ValueError(f"video {self.video_id!r} has no captions")


@dataclass(frozen=True)
class TrainingPair:
    video_id: str
    text: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


def build_positives(videos: list[CaptionedVideo]) -> list[TrainingPair]:
    """One label-1 pair per (video, caption)."""
    return [
        TrainingPair(video.video_id, caption, 1)
        for video in videos
        for caption in video.captions
    ]


def build_negatives(videos: list[CaptionedVideo], count: int, rng_seed: int) -> list[TrainingPair]:
    """Exactly `count` label-0 pairs; caption class always differs from the
    video's class. Videos are drawn uniformly, then a caption uniformly from
    all classes but the video's; sampling is with replacement and fully
    reproducible from the seed."""
    classes = sorted({v.class_label for v in videos})
    if len(classes) < 2:
        raise SingleClassDataset("negative pairs need at least two distinct classes")
    captions_by_class = {
        c: [text for v in videos if v.class_label == c for text in v.captions]
        for c in classes
    }
    # per-class pool of every other class's captions, built once
    pools = {
        c: [text for other in classes if other != c for text in captions_by_class[other]]
        for c in classes
    }
    rng = np.random.default_rng(rng_seed)
    out: list[TrainingPair] = []
    for _ in range(count):
        video = videos[int(rng.integers(len(videos)))]
        pool = pools[video.class_label]
        out.append(TrainingPair(video.video_id, pool[int(rng.integers(len(pool)))], 0))
    return out


def build_training_set(videos: list[CaptionedVideo], rng_seed: int) -> list[TrainingPair]:
    """Positives plus an equal number of negatives: a 50/50 label balance."""
    positives = build_positives(videos)
    negatives = build_negatives(videos, len(positives), rng_seed)
    return positives + negatives


def prototype_text(class_label: str) -> str:
    """The noise-free per-class description emitted by the generator."""
    return f"defining description of {class_label}"


@dataclass
class SynthDataset:
    videos: list[VideoFeature]
    captioned: list[CaptionedVideo]
    caption_vectors: dict[str, np.ndarray]
    class_prototype_texts: dict[str, str]
    splits: dict[str, str] = field(default_factory=dict)  # video_id -> train|test

    def class_labels(self) -> list[str]:
        return sorted(self.class_prototype_texts)


def synth_dataset(
    num_classes: int,
    videos_per_class: int,
    captions_per_video: int,
    feature_noise: float,
    rng_seed: int,
    class_labels: list[str] | None = None,
    test_fraction: float = 0.2,
) -> SynthDataset:
    """Linearly separable synthetic data.

    Each class gets a random 2480-wide video prototype and a unit-norm
    768-wide text prototype; every video is its class prototype plus
    Gaussian noise scaled by `feature_noise`, and every caption vector is
    the text prototype plus noise. The noise-free prototype text itself is
    included in the caption-vector table so it can serve as an annotation.
    """
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    if class_labels is None:
        class_labels = [f"class{c:02d}" for c in range(num_classes)]
    elif len(class_labels) != num_classes:
        raise ValueError("class_labels length must equal num_classes")

    rng = np.random.default_rng(rng_seed)
    videos: list[VideoFeature] = []
    captioned: list[CaptionedVideo] = []
    vectors: dict[str, np.ndarray] = {}
    proto_texts: dict[str, str] = {}
    splits: dict[str, str] = {}

    for label in class_labels:
        video_proto = rng.standard_normal(VIDEO_DIM)
        text_proto = rng.standard_normal(SENTENCE_DIM)
        text_proto /= np.linalg.norm(text_proto)
        proto_texts[label] = prototype_text(label)
        vectors[proto_texts[label]] = text_proto

        test_count = int(round(videos_per_class * test_fraction))
        test_idx = set(rng.choice(videos_per_class, size=test_count, replace=False).tolist())
        for i in range(videos_per_class):
            video_id = f"{label}_v{i:03d}"
            vec = video_proto + feature_noise * rng.standard_normal(VIDEO_DIM)
            videos.append(VideoFeature.from_vector(vec, video_id, label))
            captions = []
            for j in range(captions_per_video):
                text = f"synthetic caption {video_id} take {j}"
                vectors[text] = text_proto + feature_noise * rng.standard_normal(SENTENCE_DIM)
                captions.append(text)
            captioned.append(CaptionedVideo(video_id, label, tuple(captions)))
            splits[video_id] = "test" if i in test_idx else "train"

    return SynthDataset(videos, captioned, vectors, proto_texts, splits)


def write_synth_dataset(synth: SynthDataset, out_dir: str | Path) -> None:
    """Write the generated data in the same formats real datasets use:
    per-video feature files + index, a captions file, a sentence-vector
    file, and a starter annotation snapshot (one prototype sentence per
    class, weight 1)."""
    out = Path(out_dir)
    (out / "features").mkdir(parents=True, exist_ok=True)
    entries = []
    for video in synth.videos:
        rel = f"features/{video.video_id}.json"
        ds.write_feature_file(out / rel, video)
        entries.append(
            ds.IndexEntry(
                video_id=video.video_id,
                class_label=video.class_label,
                file=rel,
                split=synth.splits.get(video.video_id),
            )
        )
    ds.write_index(out, entries)
    ds.write_captions(
        out / "captions.json",
        [
            {"video_id": c.video_id, "class_label": c.class_label, "captions": list(c.captions)}
            for c in sorted(synth.captioned, key=lambda c: c.video_id)
        ],
    )
    save_sentence_vectors(synth.caption_vectors, out / "embeddings.json")

    from .scoring import AnnotatedFeature, AnnotationSet  # local import to avoid a cycle

    annotations = AnnotationSet(
        classes={
            label: [AnnotatedFeature(text=synth.class_prototype_texts[label], weight=1.0,
                                     class_label=label, kind="long-sentence")]
            for label in synth.class_labels()
        }
    )
    annotations.save(out / "annotations.json")
    logger.info("wrote synthetic dataset: %d videos, %d classes -> %s",
                len(synth.videos), len(synth.class_labels()), out)
