"""File formats: landmark JSON-lines, dataset manifests, run configs, reports.

Landmark files hold one face observation per line:
    {"id", "video_id", "label", "width", "height", "landmarks": [[x, y] x 68]}
Landmarks are stored as a 68-element array in the standard 1-indexed order.
All formats are plain JSON for diffability; floats round-trip bit-exactly.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .evaluation import DEFAULT_HISTOGRAM_EDGES
from .exceptions import DataError, SchemaError
from .face_model import N_LANDMARKS
from .features import LABELS, FaceObservation, FeatureVariant, FeatureVector
from .svm import DEFAULT_C_GRID, DEFAULT_GAMMA_GRID, SvmParams
from .synth import PoseDistribution, SynthConfig

SPLITS = ("train", "test")


# ---------------------------------------------------------------- observations

def observation_to_record(obs: FaceObservation) -> dict:
    return {
        "id": obs.id,
        "video_id": obs.video_id,
        "label": obs.label,
        "width": obs.image_width,
        "height": obs.image_height,
        "landmarks": [[float(x), float(y)] for x, y in obs.landmarks],
    }


def record_to_observation(rec: dict) -> FaceObservation:
    if not isinstance(rec, dict):
        raise SchemaError("record must be a JSON object")
    rid = rec.get("id")
    if not isinstance(rid, str) or not rid:
        raise SchemaError("id must be a non-empty string", field="id")
    label = rec.get("label", "unknown")
    if label not in LABELS:
        raise SchemaError(f"label must be one of {LABELS}", field="label", record_id=rid)
    video_id = rec.get("video_id")
    if video_id is not None and not isinstance(video_id, str):
        raise SchemaError("video_id must be a string or null", field="video_id", record_id=rid)
    for key in ("width", "height"):
        v = rec.get(key)
        if not isinstance(v, (int, float)) or v <= 0:
            raise SchemaError("must be a positive number", field=key, record_id=rid)
    lm = rec.get("landmarks")
    if not isinstance(lm, list) or len(lm) != N_LANDMARKS:
        raise SchemaError(f"landmarks must be a list of {N_LANDMARKS} [x, y] pairs",
                          field="landmarks", record_id=rid)
    for i, p in enumerate(lm):
        if not (isinstance(p, list) and len(p) == 2
                and all(isinstance(v, (int, float)) for v in p)):
            raise SchemaError("landmark must be an [x, y] number pair",
                              field=f"landmarks[{i}]", record_id=rid)
    try:
        return FaceObservation(id=rid, video_id=video_id, label=label,
                               image_width=int(rec["width"]), image_height=int(rec["height"]),
                               landmarks=np.asarray(lm, dtype=np.float64))
    except DataError as e:
        raise SchemaError(str(e), record_id=rid) from e


def write_observations(path, observations) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obs in observations:
            fh.write(json.dumps(observation_to_record(obs)) + "\n")


def read_observations(path) -> tuple[list[FaceObservation], list[SchemaError]]:
    """Parse a landmark JSON-lines file. Bad records are collected, not fatal;
    a file whose JSON is unreadable raises."""
    out: list[FaceObservation] = []
    errors: list[SchemaError] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                errors.append(SchemaError(f"line {lineno}: invalid JSON: {e}"))
                continue
            try:
                out.append(record_to_observation(rec))
            except SchemaError as e:
                errors.append(e)
    return out, errors


# ------------------------------------------------------------------- manifests

@dataclass(frozen=True)
class ManifestEntry:
    landmark_file: Path
    label: str
    split: str
    video_id: str | None = None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]

    def split_entries(self, split: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == split]


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid manifest JSON: {e}") from e
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise SchemaError("manifest must be an object with an 'entries' list",
                          field="entries")
    entries = []
    for i, rec in enumerate(doc["entries"]):
        if not isinstance(rec, dict):
            raise SchemaError("entry must be an object", field=f"entries[{i}]")
        for key in ("landmark_file", "label", "split"):
            if key not in rec:
                raise SchemaError("missing key", field=f"entries[{i}].{key}")
        if rec["label"] not in ("real", "fake"):
            raise SchemaError("label must be real or fake", field=f"entries[{i}].label")
        if rec["split"] not in SPLITS:
            raise SchemaError(f"split must be one of {SPLITS}", field=f"entries[{i}].split")
        file = (path.parent / rec["landmark_file"]).resolve()
        if not file.exists():
            raise SchemaError(f"landmark file {file} does not exist",
                              field=f"entries[{i}].landmark_file")
        entries.append(ManifestEntry(landmark_file=file, label=rec["label"],
                                     split=rec["split"], video_id=rec.get("video_id")))
    _check_split_hygiene(entries)
    return DatasetManifest(entries=entries)


def _check_split_hygiene(entries: list[ManifestEntry]) -> None:
    seen: dict[str, str] = {}
    for e in entries:
        if e.video_id is None:
            continue
        prev = seen.setdefault(e.video_id, e.split)
        if prev != e.split:
            raise SchemaError(f"video {e.video_id!r} appears in both splits",
                              field="entries")


def write_manifest(path, entries: list[ManifestEntry]) -> None:
    path = Path(path)
    doc = {"entries": [
        {"landmark_file": str(Path(e.landmark_file).name
                              if Path(e.landmark_file).parent == path.parent
                              else e.landmark_file),
         "label": e.label, "split": e.split, "video_id": e.video_id}
        for e in entries]}
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_split_observations(manifest: DatasetManifest, split: str
                            ) -> tuple[list[FaceObservation], list[SchemaError]]:
    """All observations of a split. The manifest entry's label and video_id
    are authoritative; a record that carries a conflicting label is an error."""
    out: list[FaceObservation] = []
    errors: list[SchemaError] = []
    for entry in manifest.split_entries(split):
        observations, errs = read_observations(entry.landmark_file)
        errors.extend(errs)
        for obs in observations:
            if obs.label != "unknown" and obs.label != entry.label:
                errors.append(SchemaError(
                    f"record label {obs.label!r} conflicts with manifest label "
                    f"{entry.label!r}", record_id=obs.id))
                continue
            out.append(replace_observation(obs, label=entry.label,
                                           video_id=entry.video_id or obs.video_id))
    return out, errors


def replace_observation(obs: FaceObservation, **changes) -> FaceObservation:
    kwargs = dict(id=obs.id, video_id=obs.video_id, label=obs.label,
                  image_width=obs.image_width, image_height=obs.image_height,
                  landmarks=obs.landmarks)
    kwargs.update(changes)
    return FaceObservation(**kwargs)


# ----------------------------------------------------------------- run configs

@dataclass
class RunConfig:
    feature_variant: FeatureVariant = FeatureVariant.RMAT_T
    folds: int = 5
    seed: int = 0
    c_grid: tuple = DEFAULT_C_GRID
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    histogram_edges: np.ndarray = field(
        default_factory=lambda: DEFAULT_HISTOGRAM_EDGES.copy())
    synth: SynthConfig = field(default_factory=SynthConfig)

    def __post_init__(self):
        if self.folds < 2:
            raise DataError("folds must be >= 2")

    def grid(self) -> list[SvmParams]:
        return [SvmParams(c=c, gamma=g) for c in self.c_grid for g in self.gamma_grid]


def load_run_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid config JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("config must be a JSON object")
    known = {"feature_variant", "folds", "seed", "svm_grid", "histogram_edges", "synth"}
    unknown = set(doc) - known
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict = {}
    if "feature_variant" in doc:
        kwargs["feature_variant"] = FeatureVariant.from_string(doc["feature_variant"])
    for key in ("folds", "seed"):
        if key in doc:
            kwargs[key] = int(doc[key])
    if "svm_grid" in doc:
        grid = doc["svm_grid"]
        if not isinstance(grid, dict):
            raise SchemaError("svm_grid must be an object", field="svm_grid")
        if "c" in grid:
            kwargs["c_grid"] = tuple(float(v) for v in grid["c"])
        if "gamma" in grid:
            kwargs["gamma_grid"] = tuple(float(v) for v in grid["gamma"])
    if "histogram_edges" in doc:
        kwargs["histogram_edges"] = np.asarray(doc["histogram_edges"], dtype=np.float64)
    if "synth" in doc:
        kwargs["synth"] = _synth_config_from_dict(doc["synth"])
    try:
        return RunConfig(**kwargs)
    except DataError as e:
        raise SchemaError(f"config failed validation: {e}") from e


def _synth_config_from_dict(doc: dict) -> SynthConfig:
    if not isinstance(doc, dict):
        raise SchemaError("synth config must be an object", field="synth")
    kwargs = dict(doc)
    pd = kwargs.pop("pose_distribution", None)
    if pd is not None:
        kwargs["pose_distribution"] = PoseDistribution(
            **{k: tuple(v) for k, v in pd.items()})
    try:
        return SynthConfig(**kwargs)
    except (DataError, TypeError) as e:
        raise SchemaError(f"synth config failed validation: {e}", field="synth") from e


# --------------------------------------------------------------------- reports

def make_report(auroc_frame: float, auroc_video: float, roc_points: np.ndarray,
                histogram, n_test: int, n_skipped: int, model_summary: dict) -> dict:
    return {
        "auroc_frame": auroc_frame,
        "auroc_video": auroc_video,
        "roc_points": [[float(a), float(b)] for a, b in roc_points],
        "histogram": {
            "edges": [float(e) for e in histogram.bin_edges],
            "counts": {k: [int(c) for c in v] for k, v in histogram.counts.items()},
            "skipped": dict(histogram.skipped),
        },
        "n_test": n_test,
        "n_skipped": n_skipped,
        "model": model_summary,
    }


def write_report(path, report: dict) -> None:
    Path(path).write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")


def read_report(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid report JSON: {e}") from e
    for key in ("auroc_frame", "auroc_video", "roc_points", "histogram"):
        if key not in doc:
            raise SchemaError("missing key in report", field=key)
    return doc


def render_report_text(report: dict) -> str:
    lines = [
        f"frame AUROC: {report['auroc_frame']:.4f}",
        f"video AUROC: {report['auroc_video']:.4f}" if report.get("auroc_video") is not None
        else "video AUROC: n/a (no video ids)",
        f"test faces: {report.get('n_test', '?')} (skipped {report.get('n_skipped', 0)})",
    ]
    hist = report.get("histogram")
    if hist:
        lines.append("cosine-distance histogram (whole vs central orientation):")
        edges = hist["edges"]
        for i in range(len(edges) - 1):
            row = " ".join(f"{k}={hist['counts'][k][i]:4d}" for k in sorted(hist["counts"]))
            lines.append(f"  [{edges[i]:.3f}, {edges[i+1]:.3f}) {row}")
    model = report.get("model") or {}
    if model:
        lines.append(f"model: variant={model.get('variant')} c={model.get('c')} "
                     f"gamma={model.get('gamma')}")
    return "\n".join(lines) + "\n"


def write_roc_csv(path, roc_points) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("fpr,tpr\n")
        for a, b in roc_points:
            fh.write(f"{float(a)!r},{float(b)!r}\n")


# ---------------------------------------------------------------- pose records

def pose_record(dp, cos_dist: float) -> dict:
    return {
        "id": dp.id,
        "video_id": dp.video_id,
        "label": dp.label,
        "whole": {"rotation": dp.whole.rotation.tolist(),
                  "translation": dp.whole.translation.tolist(),
                  "rms": dp.whole_rms},
        "central": {"rotation": dp.central.rotation.tolist(),
                    "translation": dp.central.translation.tolist(),
                    "rms": dp.central_rms},
        "cosine_distance": cos_dist,
    }


def feature_record(f: FeatureVector) -> dict:
    return {"id": f.id, "video_id": f.video_id, "label": f.label,
            "variant": f.variant.value, "values": [float(v) for v in f.values]}
