"""Command-line entry point.

Subcommands cover the full pipeline without the UI: synth, ingest, train,
gradcheck, classify, eval, correct, serve, revisions. Every invocation is
reproducible from its flags and input files alone; the only state lives in
the project directory. Set VTMM_LOG=debug|info|warning for verbosity.

Exit codes: 0 ok, 2 validation (bad input), 3 I/O or storage,
4 violated contract (including a failed gradient check), 1 unexpected.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import api, dataset as dsmod, net as netmod, pairs as pairsmod, scoring, store
from .embedding import LabelHierarchy, SentenceEmbedder, WordEmbeddingTable
from .errors import ContractError, StorageError, ValidationError, ValidationFailed

logger = logging.getLogger("vtmm.cli")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CONTRACT = 4


def _setup_logging():
    level = os.environ.get("VTMM_LOG", "warning").lower()
    logging.basicConfig(
        level={"debug": logging.DEBUG, "info": logging.INFO, "warning": logging.WARNING,
               "error": logging.ERROR}.get(level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _write_json(path: str | Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


# --- project/session plumbing shared by classify/eval/correct/serve ---

def _prepare_project(args) -> store.Project:
    project = store.open_or_init(args.project)
    config = {}
    if getattr(args, "mode", None):
        config["mode"] = args.mode
    if getattr(args, "factor", None) is not None:
        config["lambda"] = args.factor
    if getattr(args, "normalize_baseline", None):
        config["normalize_baseline"] = args.normalize_baseline
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "words", None):
        config["words"] = project.store_path(args.words)
    if getattr(args, "hierarchy", None):
        config["hierarchy"] = project.store_path(args.hierarchy)
    if getattr(args, "baseline_ref", None):
        config["baseline_ref"] = project.store_path(args.baseline_ref)
    store.update_paths(
        project,
        dataset=getattr(args, "dataset", None),
        checkpoint=getattr(args, "checkpoint", None),
        embeddings=getattr(args, "embeddings", None),
        config=config,
    )
    if getattr(args, "annotations", None):
        snapshot = scoring.AnnotationSet.load(args.annotations)
        rev = store.commit_annotations(project, snapshot, f"imported from {Path(args.annotations).name}")
        logger.info("imported annotations as revision %d", rev)
    return project


def _render_eval_table(report: dict) -> str:
    lines = []
    if "baseline_accuracy" in report:
        lines.append(
            f"baseline accuracy: {report['baseline_accuracy']:.4f}  "
            f"corrected accuracy: {report['accuracy']:.4f} "
            f"({report['correct']}/{report['total']}), lambda={report['correction_factor']}"
        )
    else:
        lines.append(f"accuracy: {report['accuracy']:.4f} ({report['correct']}/{report['total']})")
    labels = report["class_labels"]
    lines.append("per-class accuracy:")
    for label in labels:
        acc = report["per_class_accuracy"].get(label)
        lines.append(f"  {label:<24} {'n/a' if acc is None else f'{acc:.4f}'}")
    width = max(8, max(len(l) for l in labels) + 1)
    lines.append("confusion (truth rows / predicted columns):")
    lines.append(" " * width + "".join(f"{l:>{width}}" for l in labels))
    for label, row in zip(labels, report["confusion"]):
        lines.append(f"{label:>{width}}" + "".join(f"{c:>{width}}" for c in row))
    return "\n".join(lines)


# --- subcommands ---

def cmd_synth(args) -> int:
    synth = pairsmod.synth_dataset(
        num_classes=args.classes,
        videos_per_class=args.videos_per_class,
        captions_per_video=args.captions_per_video,
        feature_noise=args.noise,
        rng_seed=args.seed,
        test_fraction=args.test_fraction,
    )
    pairsmod.write_synth_dataset(synth, args.out)
    print(f"wrote {len(synth.videos)} videos across {args.classes} classes to {args.out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    table = WordEmbeddingTable.load(args.words) if args.words else None
    hierarchy = LabelHierarchy.load(args.hierarchy) if args.hierarchy else None
    src = Path(args.input)
    out = Path(args.out)
    (out / "features").mkdir(parents=True, exist_ok=True)
    skip = {dsmod.INDEX_NAME, "captions.json", "embeddings.json", "annotations.json"}
    old_index = {}
    if (src / dsmod.INDEX_NAME).exists():
        old_index = {e.video_id: e for e in dsmod.load_dataset(src).entries}
        files = sorted((src / e.file) for e in old_index.values())
    else:
        files = sorted(p for p in src.rglob("*.json") if p.name not in skip)
    if not files:
        raise ValidationError(f"{src}: no feature files to ingest")
    entries = []
    seen = set()
    for path in files:
        video = dsmod.read_feature_file(path, table, hierarchy)
        if video.video_id in seen:
            raise ValidationError(f"{path}: duplicate video_id {video.video_id!r}")
        seen.add(video.video_id)
        rel = f"features/{video.video_id}.json"
        dsmod.write_feature_file(out / rel, video)
        prior = old_index.get(video.video_id)
        entries.append(
            dsmod.IndexEntry(
                video_id=video.video_id,
                class_label=video.class_label,
                file=rel,
                split=prior.split if prior else None,
            )
        )
    dsmod.write_index(out, entries)
    print(f"ingested {len(entries)} videos -> {out}")
    return EXIT_OK


def _preset_config(args) -> netmod.TrainConfig:
    base = netmod.paper_preset(seed=args.seed) if args.preset == "paper" else netmod.desk_preset(seed=args.seed)
    overrides = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.lr is not None:
        overrides["learning_rate"] = args.lr
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    if args.dropout is not None:
        overrides["dropout"] = args.dropout
    if args.preset == "custom" and not overrides:
        raise ValidationError("--preset custom needs at least one of --epochs/--lr/--batch-size/--dropout")
    from dataclasses import replace

    return replace(base, **overrides)


def cmd_train(args) -> int:
    ds = dsmod.load_dataset(args.dataset)
    videos = dsmod.load_videos(ds)
    captions = dsmod.load_captions(args.captions)
    captioned = [
        pairsmod.CaptionedVideo(c["video_id"], c["class_label"], tuple(c["captions"]))
        for c in captions
        if ds.entry(c["video_id"]) is None or ds.entry(c["video_id"]).split != "test"
    ]
    missing = sorted({c.video_id for c in captioned} - set(videos))
    if missing:
        raise ValidationError(f"captions reference videos absent from the dataset: {missing[:5]}")

    embedder = (
        SentenceEmbedder.load_precomputed(args.embeddings) if args.embeddings else SentenceEmbedder()
    )
    cfg = _preset_config(args)
    training_pairs = pairsmod.build_training_set(captioned, rng_seed=cfg.seed)
    text_cache: dict[str, np.ndarray] = {}
    samples = []
    for pair in training_pairs:
        if pair.text not in text_cache:
            text_cache[pair.text] = embedder.embed(pair.text)
        samples.append((videos[pair.video_id].vector, text_cache[pair.text], pair.label))

    network = netmod.MatchingNetwork.create(rng_seed=cfg.seed)
    network, trace = netmod.train(network, samples, cfg)
    netmod.save_checkpoint(network, args.checkpoint)
    if args.loss_trace:
        with open(args.loss_trace, "w", encoding="utf-8") as fh:
            fh.write("epoch,mean_loss\n")
            for i, value in enumerate(trace, 1):
                fh.write(f"{i},{value!r}\n")
    print(
        f"trained on {len(samples)} pairs for {cfg.epochs} epochs "
        f"(lr={cfg.learning_rate}, dropout={cfg.dropout}, batch={cfg.batch_size}); "
        f"loss {trace[0]:.4f} -> {trace[-1]:.4f}; checkpoint {args.checkpoint}"
    )
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    err = netmod.gradient_check(trials=args.trials, seed=args.seed, step=args.step)
    print(f"max relative gradient error over {args.trials} trials: {err:.3e} (tolerance {args.tolerance:.1e})")
    if err >= args.tolerance:
        print("gradient check FAILED", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


def cmd_classify(args) -> int:
    _prepare_project(args)
    state = api.create_session(args.project)
    video = state.videos.get(args.video_id)
    if video is None:
        raise ValidationError(f"video {args.video_id!r} not in dataset")
    rev, snapshot = state.annotations()
    ranking = scoring.classify_standalone(
        video, snapshot, state.net, state.embedder,
        mode=state.project.config.get("mode", "literal"),
    )
    if args.top:
        ranking = ranking[: args.top]
    if args.json:
        print(json.dumps({"revision": rev, "video_id": args.video_id,
                          "scores": [b.to_dict() for b in ranking]}, sort_keys=True, indent=2))
    else:
        print(f"video {args.video_id} (revision {rev}):")
        for i, b in enumerate(ranking, 1):
            print(f"  {i:>2}. {b.class_label:<24} score={b.combined_score:+.4f} "
                  f"(positive={b.positive_score:.4f}, negative={b.negative_score:.4f})")
    return EXIT_OK


def cmd_eval(args) -> int:
    _prepare_project(args)
    state = api.create_session(args.project)
    rev, snapshot = state.annotations()
    videos = state.videos
    if args.split != "all":
        videos = {vid: v for vid, v in videos.items()
                  if (e := state.dataset.entry(vid)) and e.split == args.split}
    report = scoring.build_standalone_report(
        videos, snapshot, state.net, state.embedder,
        mode=state.project.config.get("mode", "literal"),
        revision=rev, split=args.split,
    )
    if args.out:
        _write_json(args.out, report)
        print(f"wrote evaluation report to {args.out}")
    if args.text or not args.out:
        print(_render_eval_table(report))
    return EXIT_OK


def cmd_correct(args) -> int:
    _prepare_project(args)
    state = api.create_session(args.project)
    rev, snapshot = state.annotations()
    baseline = dsmod.load_baseline_scores(args.baseline)
    videos = state.videos
    if args.split != "all":
        videos = {vid: v for vid, v in videos.items()
                  if (e := state.dataset.entry(vid)) and e.split == args.split}
    factor = args.factor if args.factor is not None else state.project.config.get("lambda", 1.0)
    report = scoring.build_corrected_report(
        videos, snapshot, state.net, state.embedder, baseline,
        factor=factor,
        mode=state.project.config.get("mode", "literal"),
        normalize_baseline=args.normalize_baseline
        or state.project.config.get("normalize_baseline", "none"),
        revision=rev, split=args.split,
    )
    if args.out:
        _write_json(args.out, report)
        print(f"wrote corrected report to {args.out}")
    if args.text or not args.out:
        print(_render_eval_table(report))
    return EXIT_OK


def cmd_serve(args) -> int:
    _prepare_project(args)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValidationError(f"--bind must look like HOST:PORT, got {args.bind!r}")
    api.serve(args.project, host=host, port=int(port), ui_dir=args.ui)
    return EXIT_OK


def cmd_revisions(args) -> int:
    project = store.open_or_init(args.project)
    if args.diff:
        rev_a, rev_b = args.diff
        changes = store.diff(project, rev_a, rev_b)
        if args.json:
            print(json.dumps({"rev_a": rev_a, "rev_b": rev_b, "changes": changes},
                             sort_keys=True, indent=2))
        elif not changes:
            print(f"no changes between revision {rev_a} and {rev_b}")
        else:
            for change in changes:
                print(f"{change['class_label']}:")
                for f in change["added"]:
                    print(f"  + {f['text']!r} (weight {f['weight']}, {f['kind']})")
                for f in change["removed"]:
                    print(f"  - {f['text']!r} (weight {f['weight']}, {f['kind']})")
                for w in change["weight_changes"]:
                    print(f"  ~ {w['text']!r} weight {w['from']} -> {w['to']}")
    else:
        revisions = store.list_revisions(project)
        if args.json:
            print(json.dumps({"active": project.active_revision, "revisions": revisions},
                             sort_keys=True, indent=2))
        else:
            for rev in revisions:
                marker = "*" if rev["revision"] == project.active_revision else " "
                print(f"{marker} {rev['revision']:>4}  {rev['timestamp']}  {rev['note']}")
    return EXIT_OK


# --- parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vtmm",
        description="Zero-shot action recognition workbench: match videos against text features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--videos-per-class", type=int, default=20)
    p.add_argument("--captions-per-video", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate and index feature files")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--words", help="GloVe-style word vectors (needed for raw feature files)")
    p.add_argument("--hierarchy", help="child->parent label hierarchy JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="pretrain the matching network")
    p.add_argument("--dataset", required=True)
    p.add_argument("--captions", required=True,
                   help="captions JSON; videos indexed as split=test are held out")
    p.add_argument("--embeddings", help="precomputed sentence vectors JSON (default: stub embedder)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--loss-trace", help="write per-epoch mean loss CSV here")
    p.add_argument("--preset", choices=["desk", "paper", "custom"], default="desk")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("gradcheck", help="verify backprop against finite differences")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    def project_flags(p, with_mode=True):
        p.add_argument("--project", required=True)
        p.add_argument("--dataset")
        p.add_argument("--checkpoint")
        p.add_argument("--annotations", help="commit this annotation snapshot before running")
        p.add_argument("--embeddings", help="precomputed sentence vectors JSON")
        p.add_argument("--words")
        p.add_argument("--hierarchy")
        p.add_argument("--seed", type=int)
        if with_mode:
            p.add_argument("--mode", choices=["literal", "subtractive"])

    p = sub.add_parser("classify", help="rank classes for one video")
    project_flags(p)
    p.add_argument("--video-id", required=True)
    p.add_argument("--top", type=int, default=0, help="print only the best K classes")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="standalone evaluation report")
    project_flags(p)
    p.add_argument("--split", default="all")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--text", action="store_true", help="also print the table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("correct", help="correct a baseline classifier's scores")
    project_flags(p)
    p.add_argument("--baseline", required=True, help="baseline scores JSON {video: {class: score}}")
    p.add_argument("--lambda", dest="factor", type=float, default=None,
                   help="correction factor (default 1.0)")
    p.add_argument("--normalize-baseline", choices=["none", "softmax"])
    p.add_argument("--split", default="all")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--text", action="store_true")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("serve", help="start the workbench HTTP API")
    project_flags(p)
    p.add_argument("--bind", default="127.0.0.1:8321")
    p.add_argument("--ui", help="serve this directory as the browser UI at /ui")
    p.add_argument("--baseline", dest="baseline_ref",
                   help="register this baseline scores file for the correction panel")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("revisions", help="list or diff annotation history")
    p.add_argument("--project", required=True)
    p.add_argument("--diff", nargs=2, type=int, metavar=("REV_A", "REV_B"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_revisions)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailed as exc:
        print(f"error[{type(exc).__name__}]: annotation snapshot rejected", file=sys.stderr)
        for diag in exc.diagnostics:
            print(f"  - {diag}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StorageError, OSError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_IO
    except ContractError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
