"""Command-line interface.

Subcommands: pose, features, train, eval, synth, report. Exit codes:
0 success, 1 usage error, 2 data error, 3 internal error. Bad individual
records are skipped and counted; a run only fails when nothing survives.
All randomness flows from one seed: the synth generator and CV shuffling
derive named sub-streams from it, and the SVM trainer is deterministic by
construction (fixed working-set order), so no stream is needed there.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _accel, evaluation, face_model, formats, svm, synth
from .exceptions import DataError, DualposeError
from .features import (FaceObservation, FeatureVariant, estimate_dual_poses,
                       make_feature)
from .geometry import cosine_distance, head_orientation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

LOW_SIGNAL_AUROC = 0.55


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this tool reserves 2 for data
    # problems, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit2(message)


class SystemExit2(Exception):
    def __init__(self, message):
        self.message = message
        super().__init__(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dualpose",
                description="Detect face swaps from inconsistent dual head poses.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("pose", parents=[], help="estimate dual poses for landmark files")
    sp.add_argument("--in", dest="inputs", nargs="+", required=True,
                    help="landmark JSON-lines files")
    sp.add_argument("--face-model", help="canonical model JSON (default: bundled)")
    sp.add_argument("--out", required=True, help="output pose records (JSON lines)")

    sp = sub.add_parser("features", help="extract pose-difference feature vectors")
    sp.add_argument("--in", dest="inputs", nargs="+", required=True)
    sp.add_argument("--face-model")
    sp.add_argument("--variant", default=FeatureVariant.RMAT_T.value,
                    choices=[v.value for v in FeatureVariant])
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("train", help="train an SVM on the manifest's train split")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--config", help="run config JSON")
    sp.add_argument("--face-model")
    sp.add_argument("--variant", choices=[v.value for v in FeatureVariant])
    sp.add_argument("--folds", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True, help="model JSON path")

    sp = sub.add_parser("eval", help="evaluate a model on the manifest's test split")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--config")
    sp.add_argument("--face-model")
    sp.add_argument("--out", required=True, help="report JSON path")
    sp.add_argument("--roc-csv", help="optional CSV dump of ROC points")

    sp = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    sp.add_argument("--config", help="run config JSON (synth section)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True, help="output directory")

    sp = sub.add_parser("report", help="print a stored evaluation report")
    sp.add_argument("--in", dest="inputs", required=True, help="report JSON")
    sp.add_argument("--roc-csv")
    return p


def _load_face_model(path: str | None):
    return face_model.load_model(path) if path else face_model.default_model()


def _read_inputs(paths) -> tuple[list[FaceObservation], int]:
    observations: list[FaceObservation] = []
    n_rejected = 0
    for path in paths:
        if not Path(path).exists():
            raise DataError(f"input file {path} does not exist")
        obs, errors = formats.read_observations(path)
        observations.extend(obs)
        n_rejected += len(errors)
        for e in errors:
            print(f"warning: {path}: rejected record: {e}", file=sys.stderr)
    return observations, n_rejected


def cmd_pose(args) -> int:
    model = _load_face_model(args.face_model)
    observations, n_rejected = _read_inputs(args.inputs)
    poses, failures = estimate_dual_poses(observations, model)
    for oid, err in failures:
        print(f"warning: {oid}: {err}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        for dp in poses:
            d = cosine_distance(head_orientation(dp.whole.rotation),
                                head_orientation(dp.central.rotation))
            fh.write(json.dumps(formats.pose_record(dp, d)) + "\n")
    total_failed = n_rejected + len(failures)
    print(f"pose: wrote {len(poses)} records to {args.out} "
          f"({total_failed} rejected/failed)")
    if not poses:
        raise DataError("no record produced a pose")
    return EXIT_OK


def cmd_features(args) -> int:
    model = _load_face_model(args.face_model)
    variant = FeatureVariant.from_string(args.variant)
    observations, n_rejected = _read_inputs(args.inputs)
    poses, failures = estimate_dual_poses(observations, model)
    for oid, err in failures:
        print(f"warning: {oid}: {err}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        for dp in poses:
            fh.write(json.dumps(formats.feature_record(make_feature(dp, variant))) + "\n")
    print(f"features: wrote {len(poses)} {variant.value} vectors to {args.out} "
          f"({n_rejected + len(failures)} rejected/failed)")
    if not poses:
        raise DataError("no record produced a feature vector")
    return EXIT_OK


def _effective_config(args) -> formats.RunConfig:
    config = formats.load_run_config(args.config) if getattr(args, "config", None) \
        else formats.RunConfig()
    if getattr(args, "variant", None):
        config.feature_variant = FeatureVariant.from_string(args.variant)
    if getattr(args, "folds", None) is not None:
        config.folds = args.folds
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
        config.synth = synth_replace_seed(config.synth, args.seed)
    return config


def synth_replace_seed(cfg: synth.SynthConfig, seed: int) -> synth.SynthConfig:
    from dataclasses import replace
    return replace(cfg, seed=seed)


def _split_features(manifest, split: str, model, variant):
    observations, errors = formats.load_split_observations(manifest, split)
    for e in errors:
        print(f"warning: rejected record: {e}", file=sys.stderr)
    if not observations:
        raise DataError(f"{split} split has no usable observations")
    poses, failures = estimate_dual_poses(observations, model)
    for oid, err in failures:
        print(f"warning: {oid}: {err}", file=sys.stderr)
    feats = [make_feature(dp, variant) for dp in poses]
    n_skipped = len(errors) + len(failures)
    return feats, n_skipped


def cmd_train(args) -> int:
    config = _effective_config(args)
    model = _load_face_model(args.face_model)
    manifest = formats.load_manifest(args.manifest)
    variant = config.feature_variant
    feats, n_skipped = _split_features(manifest, "train", model, variant)
    labels = {f.label for f in feats}
    if labels != {"real", "fake"}:
        raise DataError(f"train split must contain both classes, found {sorted(labels)}")
    samples = [svm.LabeledSample(f.values, 1 if f.label == "fake" else -1) for f in feats]
    params, trained = svm.grid_search_cv(samples, config.grid(), config.folds,
                                         seed=config.seed, variant=variant)
    cv = svm.cross_val_auroc(samples, params, config.folds, seed=config.seed)
    svm.save_model(trained, args.out)
    print(f"train: {len(samples)} samples ({n_skipped} skipped), variant={variant.value}")
    print(f"train: chose c={params.c} gamma={params.gamma}, CV AUROC={cv:.4f}")
    if cv < LOW_SIGNAL_AUROC:
        print(f"warning: CV AUROC {cv:.3f} is near chance; "
              "features look uninformative on this data", file=sys.stderr)
    print(f"train: wrote model to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    config = _effective_config(args)
    model = _load_face_model(args.face_model)
    manifest = formats.load_manifest(args.manifest)
    trained = svm.load_model(args.model)
    variant = trained.variant or config.feature_variant

    observations, errors = formats.load_split_observations(manifest, "test")
    for e in errors:
        print(f"warning: rejected record: {e}", file=sys.stderr)
    if not observations:
        raise DataError("test split has no usable observations")
    poses, failures = estimate_dual_poses(observations, model)
    for oid, err in failures:
        print(f"warning: {oid}: {err}", file=sys.stderr)
    feats = [make_feature(dp, variant) for dp in poses]
    labels = {f.label for f in feats}
    if labels != {"real", "fake"}:
        raise DataError(f"test split must contain both classes, found {sorted(labels)}")

    X = np.stack([f.values for f in feats])
    scores = svm.decision_scores(trained, X)
    frame_items = [evaluation.ScoredItem(id=f.id, video_id=f.video_id, score=float(s),
                                         label=1 if f.label == "fake" else 0)
                   for f, s in zip(feats, scores)]
    frame_auroc = evaluation.auroc(frame_items)
    roc = evaluation.roc_curve(frame_items)
    if all(it.video_id is not None for it in frame_items):
        video_items = evaluation.aggregate_by_video(frame_items)
        video_auroc = evaluation.auroc(video_items)
    else:
        video_auroc = None
    ok_poses = {p.id for p in poses}
    hist = evaluation.cosine_histogram([o for o in observations if o.id in ok_poses],
                                       model, edges=config.histogram_edges)
    report = formats.make_report(
        auroc_frame=float(frame_auroc),
        auroc_video=None if video_auroc is None else float(video_auroc),
        roc_points=roc.points,
        histogram=hist,
        n_test=len(feats),
        n_skipped=len(errors) + len(failures),
        model_summary={"variant": variant.value, "c": trained.params.c,
                       "gamma": trained.params.gamma},
    )
    formats.write_report(args.out, report)
    if args.roc_csv:
        formats.write_roc_csv(args.roc_csv, roc.points)
    sys.stdout.write(formats.render_report_text(report))
    print(f"eval: wrote report to {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    config = _effective_config(args)
    cfg = config.synth
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = face_model.default_model()
    observations = synth.generate(cfg, model)
    train_ids, test_ids = synth.split_videos(cfg)
    split_of = {vid: "train" for vid in train_ids}
    split_of.update({vid: "test" for vid in test_ids})

    by_video: dict[str, list[FaceObservation]] = {}
    for obs in observations:
        by_video.setdefault(obs.video_id, []).append(obs)
    entries = []
    for vid, group in by_video.items():
        file = out_dir / f"{vid}.jsonl"
        formats.write_observations(file, group)
        entries.append(formats.ManifestEntry(
            landmark_file=file, label=group[0].label, split=split_of[vid],
            video_id=vid))
    formats.write_manifest(out_dir / "manifest.json", entries)
    n_train = sum(1 for e in entries if e.split == "train")
    n_test = len(entries) - n_train
    print(f"synth: wrote {len(observations)} observations in {len(entries)} videos "
          f"({n_train} train / {n_test} test) to {out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    report = formats.read_report(args.inputs)
    sys.stdout.write(formats.render_report_text(report))
    if args.roc_csv:
        formats.write_roc_csv(args.roc_csv, report["roc_points"])
    return EXIT_OK


_COMMANDS = {
    "pose": cmd_pose,
    "features": cmd_features,
    "train": cmd_train,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit2 as e:
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except DualposeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001 - last-resort mapping to exit code
        print(f"internal error: {e!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
