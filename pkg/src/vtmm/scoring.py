"""Class scores from per-feature matching degrees.

Each action class carries annotated text features with signed weights.
Features with positive weights aggregate into a weighted mean
positive_score, features with negative weights into a weighted mean
negative_score (the negative signs cancel between numerator and
denominator, so it is likewise a convex combination of those features'
degrees). The two combine either literally (sum) or subtractively
(positive minus negative, the counter-indicative reading); literal is the
default. A separately produced baseline classifier can be corrected by
adding factor-scaled class scores to its own.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import SentenceEmbedder
from .errors import (
    EmptyEvaluation,
    NoFeatures,
    StorageError,
    UnknownClassInVTMM,
    ValidationFailed,
)
from .features import VideoFeature
from .net import MatchingNetwork

logger = logging.getLogger("vtmm.scoring")

FEATURE_KINDS = ("long-sentence", "common-short")
MODES = ("literal", "subtractive")


@dataclass(frozen=True)
class AnnotatedFeature:
    """One text feature attached to a class, with a signed importance weight."""

    text: str
    weight: float = 1.0
    class_label: str = ""
    kind: str = "long-sentence"

    def __post_init__(self):
        if self.weight == 0:
            raise ValueError("feature weight must be nonzero")
        if not self.text.strip():
            raise ValueError("feature text must be nonempty")
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"kind must be one of {FEATURE_KINDS}, got {self.kind!r}")


@dataclass
class ClassScoreBreakdown:
    class_label: str
    positive_score: float
    negative_score: float
    combined_score: float
    per_feature: list[tuple[AnnotatedFeature, float]]

    def to_dict(self) -> dict:
        return {
            "class_label": self.class_label,
            "positive_score": self.positive_score,
            "negative_score": self.negative_score,
            "combined_score": self.combined_score,
            "features": [
                {"text": f.text, "weight": f.weight, "kind": f.kind, "degree": degree}
                for f, degree in self.per_feature
            ],
        }


@dataclass
class CorrectionResult:
    class_label: str
    baseline_score: float
    matching_score: float
    correction_factor: float
    corrected_score: float


def class_score(
    features: list[AnnotatedFeature],
    degrees: list[float],
    mode: str = "literal",
) -> ClassScoreBreakdown:
    """Weighted-mean aggregation of one class's feature degrees.

    positive_score averages degrees of weight>0 features (weighted by their
    weights), negative_score averages degrees of weight<0 features; an
    empty group scores 0. literal: combined = positive + negative;
    subtractive: combined = positive - negative.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if len(features) == 0:
        raise NoFeatures("class has no annotated features")
    if len(degrees) != len(features):
        raise ValueError(f"{len(degrees)} degrees for {len(features)} features")

    pos_num = pos_den = neg_num = neg_den = 0.0
    for feat, degree in zip(features, degrees):
        if feat.weight > 0:
            pos_num += feat.weight * degree
            pos_den += feat.weight
        else:
            neg_num += feat.weight * degree
            neg_den += feat.weight
    positive = pos_num / pos_den if pos_den != 0 else 0.0
    negative = neg_num / neg_den if neg_den != 0 else 0.0
    combined = positive + negative if mode == "literal" else positive - negative
    label = features[0].class_label
    return ClassScoreBreakdown(
        class_label=label,
        positive_score=positive,
        negative_score=negative,
        combined_score=combined,
        per_feature=list(zip(features, degrees)),
    )


class AnnotationSet:
    """The annotation snapshot: a reusable short-phrase vocabulary plus the
    per-class feature lists that actually drive scoring."""

    def __init__(
        self,
        classes: dict[str, list[AnnotatedFeature]] | None = None,
        common_features: list[tuple[str, float]] | None = None,
    ):
        self.classes: dict[str, list[AnnotatedFeature]] = dict(classes or {})
        self.common_features: list[tuple[str, float]] = list(common_features or [])

    def validate(self) -> list[str]:
        problems = []
        for text, weight in self.common_features:
            if not str(text).strip():
                problems.append("common feature with empty text")
            if weight == 0:
                problems.append(f"common feature {text!r} has zero weight")
        for label, feats in self.classes.items():
            if not str(label).strip():
                problems.append("class with empty label")
            for f in feats:
                if not f.text.strip():
                    problems.append(f"class {label!r}: feature with empty text")
                if f.weight == 0:
                    problems.append(f"class {label!r}: feature {f.text!r} has zero weight")
                if f.kind not in FEATURE_KINDS:
                    problems.append(f"class {label!r}: feature {f.text!r} has unknown kind {f.kind!r}")
        return problems

    def to_dict(self) -> dict:
        return {
            "common_features": [
                {"text": t, "weight": w} for t, w in self.common_features
            ],
            "classes": {
                label: [
                    {"text": f.text, "weight": f.weight, "kind": f.kind}
                    for f in feats
                ]
                for label, feats in sorted(self.classes.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnnotationSet":
        """Parse a snapshot, collecting every bad feature into one rejection."""
        if not isinstance(data, dict) or "classes" not in data:
            raise StorageError("annotation snapshot must be a JSON object with a 'classes' map")
        problems = []
        classes = {}
        for label, feats in data["classes"].items():
            parsed = []
            for f in feats:
                try:
                    parsed.append(
                        AnnotatedFeature(
                            text=f["text"],
                            weight=float(f.get("weight", 1.0)),
                            class_label=label,
                            kind=f.get("kind", "long-sentence"),
                        )
                    )
                except (ValueError, KeyError, TypeError) as exc:
                    problems.append(f"class {label!r}: {exc}")
            classes[label] = parsed
        common = [(f["text"], float(f.get("weight", 1.0))) for f in data.get("common_features", [])]
        if problems:
            raise ValidationFailed(problems)
        return cls(classes=classes, common_features=common)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "AnnotationSet":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise StorageError(f"{path}: not valid JSON: {exc}") from exc


def feature_degrees(
    video: VideoFeature | np.ndarray,
    features: list[AnnotatedFeature],
    net: MatchingNetwork,
    embedder: SentenceEmbedder,
    embed_cache: dict[str, np.ndarray] | None = None,
) -> list[float]:
    """Matching degree of the video against each feature text, batched."""
    vec = video.vector if isinstance(video, VideoFeature) else np.asarray(video, dtype=np.float64)
    texts = []
    for f in features:
        if embed_cache is not None and f.text in embed_cache:
            texts.append(embed_cache[f.text])
        else:
            emb = embedder.embed(f.text)
            if embed_cache is not None:
                embed_cache[f.text] = emb
            texts.append(emb)
    batch = np.stack(texts)
    tiled = np.broadcast_to(vec, (batch.shape[0], vec.shape[0]))
    degrees = net.forward_infer(tiled, batch)
    return [float(x) for x in np.atleast_1d(degrees)]


def classify_standalone(
    video: VideoFeature | np.ndarray,
    annotations: AnnotationSet,
    net: MatchingNetwork,
    embedder: SentenceEmbedder,
    mode: str = "literal",
    embed_cache: dict[str, np.ndarray] | None = None,
) -> list[ClassScoreBreakdown]:
    """Score the video against every annotated class, ranked best first.

    Ranking is descending by combined score with lexicographic label order
    breaking exact ties, so repeated calls agree bit for bit.
    """
    breakdowns = []
    for label in sorted(annotations.classes):
        feats = annotations.classes[label]
        if len(feats) == 0:
            raise NoFeatures(f"class {label!r} has no annotated features")
        degrees = feature_degrees(video, feats, net, embedder, embed_cache)
        breakdowns.append(class_score(feats, degrees, mode))
    breakdowns.sort(key=lambda b: (-b.combined_score, b.class_label))
    return breakdowns


def argmax_class(scores: dict[str, float]) -> str:
    """Highest-scoring class; exact ties go to the lexicographically first label."""
    return min(scores, key=lambda label: (-scores[label], label))


def correct(
    baseline_scores: dict[str, float],
    matching_scores: dict[str, float],
    factor: float = 1.0,
) -> dict[str, CorrectionResult]:
    """Add factor-scaled matching scores onto the baseline's class scores.

    Classes without annotations contribute a matching score of 0; an
    annotated class missing from the baseline is a caller error.
    """
    unknown = sorted(set(matching_scores) - set(baseline_scores))
    if unknown:
        raise UnknownClassInVTMM(f"classes {unknown} are annotated but absent from the baseline")
    out = {}
    for label, base in baseline_scores.items():
        match = matching_scores.get(label, 0.0)
        out[label] = CorrectionResult(
            class_label=label,
            baseline_score=base,
            matching_score=match,
            correction_factor=factor,
            corrected_score=base + factor * match,
        )
    return out


def softmax_scores(scores: dict[str, float]) -> dict[str, float]:
    labels = sorted(scores)
    vals = np.array([scores[l] for l in labels], dtype=np.float64)
    vals -= vals.max()
    ex = np.exp(vals)
    ex /= ex.sum()
    return {l: float(v) for l, v in zip(labels, ex)}


@dataclass
class EvaluationResult:
    accuracy: float
    class_labels: list[str]
    confusion: list[list[int]]
    per_class_accuracy: dict[str, float]
    total: int
    correct: int


def evaluate(predictions: list[tuple[str, str, str]]) -> EvaluationResult:
    """Accuracy, truth-by-predicted confusion counts, per-class accuracy.

    `predictions` holds (video_id, predicted, truth) triples.
    """
    if len(predictions) == 0:
        raise EmptyEvaluation("no predictions to evaluate")
    labels = sorted({p[1] for p in predictions} | {p[2] for p in predictions})
    index = {label: i for i, label in enumerate(labels)}
    confusion = [[0] * len(labels) for _ in labels]
    hits = 0
    for _, predicted, truth in predictions:
        confusion[index[truth]][index[predicted]] += 1
        if predicted == truth:
            hits += 1
    per_class = {}
    for label in labels:
        row = confusion[index[label]]
        row_sum = sum(row)
        if row_sum > 0:
            per_class[label] = row[index[label]] / row_sum
    return EvaluationResult(
        accuracy=hits / len(predictions),
        class_labels=labels,
        confusion=confusion,
        per_class_accuracy=per_class,
        total=len(predictions),
        correct=hits,
    )


def build_standalone_report(
    videos: dict[str, VideoFeature],
    annotations: AnnotationSet,
    net: MatchingNetwork,
    embedder: SentenceEmbedder,
    mode: str = "literal",
    revision: int | None = None,
    split: str = "all",
    embed_cache: dict[str, np.ndarray] | None = None,
) -> dict:
    """Full evaluation report with per-video per-feature breakdowns.

    Only videos carrying a truth label participate. The report contains no
    timestamps or filesystem paths, so identical inputs yield identical
    bytes once serialized with sorted keys.
    """
    labeled = {vid: v for vid, v in sorted(videos.items()) if v.class_label is not None}
    if not labeled:
        raise EmptyEvaluation("no labeled videos to evaluate")
    predictions = []
    video_reports = []
    for vid, video in labeled.items():
        ranking = classify_standalone(video, annotations, net, embedder, mode, embed_cache)
        predicted = ranking[0].class_label
        predictions.append((vid, predicted, video.class_label))
        video_reports.append(
            {
                "video_id": vid,
                "true_class": video.class_label,
                "predicted_class": predicted,
                "ranking": [b.to_dict() for b in ranking],
            }
        )
    result = evaluate(predictions)
    report = {
        "kind": "standalone_evaluation",
        "mode": mode,
        "split": split,
        "accuracy": result.accuracy,
        "correct": result.correct,
        "total": result.total,
        "class_labels": result.class_labels,
        "confusion": result.confusion,
        "per_class_accuracy": result.per_class_accuracy,
        "videos": video_reports,
    }
    if revision is not None:
        report["revision"] = revision
    return report


def build_corrected_report(
    videos: dict[str, VideoFeature],
    annotations: AnnotationSet,
    net: MatchingNetwork,
    embedder: SentenceEmbedder,
    baseline: dict[str, dict[str, float]],
    factor: float = 1.0,
    mode: str = "literal",
    normalize_baseline: str = "none",
    revision: int | None = None,
    split: str = "all",
    embed_cache: dict[str, np.ndarray] | None = None,
) -> dict:
    """Correct a baseline classifier's per-video class scores and evaluate
    both the baseline and the corrected predictions."""
    if normalize_baseline not in ("none", "softmax"):
        raise ValueError(f"normalize_baseline must be 'none' or 'softmax', got {normalize_baseline!r}")
    labeled = {vid: v for vid, v in sorted(videos.items()) if v.class_label is not None}
    if not labeled:
        raise EmptyEvaluation("no labeled videos to evaluate")
    missing = sorted(vid for vid in labeled if vid not in baseline)
    if missing:
        raise EmptyEvaluation(f"baseline scores missing for videos {missing[:5]}")

    base_predictions = []
    corrected_predictions = []
    video_reports = []
    for vid, video in labeled.items():
        base_scores = {c: float(s) for c, s in baseline[vid].items()}
        if normalize_baseline == "softmax":
            base_scores = softmax_scores(base_scores)
        matching = {}
        for label in sorted(annotations.classes):
            feats = annotations.classes[label]
            if not feats:
                continue
            degrees = feature_degrees(video, feats, net, embedder, embed_cache)
            matching[label] = class_score(feats, degrees, mode).combined_score
        results = correct(base_scores, matching, factor)
        base_pred = argmax_class(base_scores)
        corr_pred = argmax_class({l: r.corrected_score for l, r in results.items()})
        base_predictions.append((vid, base_pred, video.class_label))
        corrected_predictions.append((vid, corr_pred, video.class_label))
        video_reports.append(
            {
                "video_id": vid,
                "true_class": video.class_label,
                "baseline_predicted": base_pred,
                "corrected_predicted": corr_pred,
                "classes": [
                    {
                        "class_label": label,
                        "baseline_score": r.baseline_score,
                        "matching_score": r.matching_score,
                        "corrected_score": r.corrected_score,
                    }
                    for label, r in sorted(results.items())
                ],
            }
        )
    base_result = evaluate(base_predictions)
    corr_result = evaluate(corrected_predictions)
    report = {
        "kind": "corrected_evaluation",
        "mode": mode,
        "split": split,
        "correction_factor": factor,
        "normalize_baseline": normalize_baseline,
        "accuracy": corr_result.accuracy,
        "correct": corr_result.correct,
        "total": corr_result.total,
        "class_labels": corr_result.class_labels,
        "confusion": corr_result.confusion,
        "per_class_accuracy": corr_result.per_class_accuracy,
        "baseline_accuracy": base_result.accuracy,
        "baseline_class_labels": base_result.class_labels,
        "baseline_confusion": base_result.confusion,
        "baseline_per_class_accuracy": base_result.per_class_accuracy,
        "videos": video_reports,
    }
    if revision is not None:
        report["revision"] = revision
    return report
