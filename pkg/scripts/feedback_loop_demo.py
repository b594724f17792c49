#!/usr/bin/env python3
"""Walk through the no-retraining feedback loop on two confusable classes.

Both classes start annotated with the same single feature, so one class's
videos all drain into the other. Adding one discriminative sentence to the
losing class fixes it immediately, with the checkpoint untouched.
"""

import argparse

from vtmm import net as netmod
from vtmm import pairs as pairsmod
from vtmm import scoring
from vtmm.embedding import SentenceEmbedder


def evaluate(synth, annotations, network, embedder):
    cache = {}
    predictions = []
    for video in synth.videos:
        if synth.splits[video.video_id] != "test":
            continue
        ranking = scoring.classify_standalone(video, annotations, network, embedder,
                                              embed_cache=cache)
        predictions.append((video.video_id, ranking[0].class_label, video.class_label))
    return scoring.evaluate(predictions)


def show(result, title):
    print(f"\n{title}")
    print(f"  accuracy {result.accuracy:.3f}")
    labels = result.class_labels
    width = max(len(l) for l in labels) + 2
    print("  " + " " * width + "".join(f"{l:>{width}}" for l in labels))
    for label, row in zip(labels, result.confusion):
        print(f"  {label:>{width}}" + "".join(f"{c:>{width}}" for c in row))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=21)
    ap.add_argument("--epochs", type=int, default=100)
    args = ap.parse_args()

    confused, other = "rings_swing", "handstand_walk"
    synth = pairsmod.synth_dataset(2, 20, 3, feature_noise=0.05, rng_seed=args.seed,
                                   class_labels=[other, confused])
    train_videos = [c for c in synth.captioned if synth.splits[c.video_id] == "train"]
    training = pairsmod.build_training_set(train_videos, rng_seed=args.seed)
    vid_map = {v.video_id: v for v in synth.videos}
    samples = [(vid_map[p.video_id].vector, synth.caption_vectors[p.text], p.label)
               for p in training]
    network = netmod.MatchingNetwork.create(rng_seed=args.seed)
    network, _ = netmod.train(network, samples, netmod.desk_preset(seed=args.seed,
                                                                   epochs=args.epochs))
    embedder = SentenceEmbedder(provider="precomputed", table=synth.caption_vectors)

    shared = pairsmod.prototype_text(other)
    f = scoring.AnnotatedFeature
    initial = scoring.AnnotationSet(classes={
        confused: [f(shared, 1.0, confused)],
        other: [f(shared, 1.0, other)],
    })
    show(evaluate(synth, initial, network, embedder),
         f"both classes share one feature: {shared!r}")

    improved = scoring.AnnotationSet(classes={
        confused: [f(shared, 1.0, confused),
                   f(pairsmod.prototype_text(confused), 1.0, confused)],
        other: [f(shared, 1.0, other)],
    })
    show(evaluate(synth, improved, network, embedder),
         f"after adding {pairsmod.prototype_text(confused)!r} to {confused}")
    print("\nsame checkpoint, no retraining; only the annotations changed")


if __name__ == "__main__":
    main()
