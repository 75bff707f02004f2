"""Ranking metrics and score aggregation.

AUROC follows the Mann-Whitney convention: the probability that a random
fake outranks a random real, ties counted half. The ROC curve is a threshold
sweep whose trapezoidal area equals that statistic exactly.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .face_model import CanonicalFaceModel
from .features import FaceObservation, estimate_dual_pose
from .geometry import cosine_distance, head_orientation
from .exceptions import PoseEstimationError

LABEL_REAL = 0
LABEL_FAKE = 1

DEFAULT_HISTOGRAM_EDGES = np.linspace(0.0, 0.10, 21)


@dataclass
class ScoredItem:
    """One scored unit (frame or video); higher score = more likely fake."""

    id: str
    score: float
    label: int
    video_id: str | None = None

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise DataError(f"item {self.id!r}: score must be finite")
        if self.label not in (LABEL_REAL, LABEL_FAKE):
            raise DataError(f"item {self.id!r}: label must be 0 (real) or 1 (fake)")


@dataclass
class RocCurve:
    points: np.ndarray  # (k, 2) rows of (false-positive rate, true-positive rate)
    auroc: float


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: dict  # label name -> per-bin counts
    skipped: dict  # label name -> observations dropped due to pose failures


def _scores_labels(items: list[ScoredItem]):
    if not items:
        raise DataError("no scored items")
    scores = np.array([it.score for it in items], dtype=np.float64)
    labels = np.array([it.label for it in items], dtype=np.int64)
    if labels.min() == labels.max():
        raise DataError("need at least one item of each class")
    return scores, labels


def auroc_from_arrays(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mann-Whitney AUROC via tie-averaged ranks; exact for half-credit ties."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n = scores.shape[0]
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and s[j + 1] == s[i]:
            j += 1
        ranks[i:j + 1] = 0.5 * (i + j) + 1.0
        i = j + 1
    pos = labels[order] == LABEL_FAKE
    n_pos = int(pos.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("need at least one item of each class")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auroc(items: list[ScoredItem]) -> float:
    scores, labels = _scores_labels(items)
    return auroc_from_arrays(scores, labels)


def roc_curve(items: list[ScoredItem]) -> RocCurve:
    """Threshold sweep over the distinct scores, descending. Points run from
    (0,0) to (1,1); the trapezoidal area equals `auroc` to rounding."""
    scores, labels = _scores_labels(items)
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    pos = (labels[order] == LABEL_FAKE).astype(np.float64)
    neg = 1.0 - pos
    tp = np.cumsum(pos)
    fp = np.cumsum(neg)
    distinct = np.nonzero(np.diff(s, append=-np.inf))[0]  # last index of each tie block
    tpr = np.concatenate([[0.0], tp[distinct] / tp[-1]])
    fpr = np.concatenate([[0.0], fp[distinct] / fp[-1]])
    points = np.column_stack([fpr, tpr])
    area = float(np.trapezoid(points[:, 1], points[:, 0]))
    return RocCurve(points=points, auroc=area)


def aggregate_by_video(items: list[ScoredItem]) -> list[ScoredItem]:
    """Average frame scores per video; label inherited, order of first
    occurrence preserved."""
    groups: dict[str, list[ScoredItem]] = {}
    for it in items:
        if it.video_id is None:
            raise DataError(f"item {it.id!r} has no video_id; cannot aggregate")
        groups.setdefault(it.video_id, []).append(it)
    out = []
    for vid, members in groups.items():
        labels = {m.label for m in members}
        if len(labels) > 1:
            raise DataError(f"video {vid!r} mixes labels {sorted(labels)}")
        score = float(np.mean([m.score for m in members]))
        out.append(ScoredItem(id=vid, video_id=vid, score=score, label=members[0].label))
    return out


def cosine_histogram(observations: list[FaceObservation], model: CanonicalFaceModel,
                     edges=None) -> Histogram:
    """Per-class histogram of the cosine distance between whole-face and
    central-region head orientations. Pose failures are skipped and counted."""
    edges = DEFAULT_HISTOGRAM_EDGES if edges is None else np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.shape[0] < 2 or np.any(np.diff(edges) <= 0):
        raise DataError("histogram edges must be strictly increasing with >= 2 entries")
    dists: dict[str, list[float]] = {"real": [], "fake": []}
    skipped = {"real": 0, "fake": 0}
    for obs in observations:
        if obs.label not in dists:
            raise DataError(f"observation {obs.id!r} must be labeled real or fake, "
                            f"got {obs.label!r}")
        try:
            dp = estimate_dual_pose(obs, model)
        except PoseEstimationError:
            skipped[obs.label] += 1
            continue
        d = cosine_distance(head_orientation(dp.whole.rotation),
                            head_orientation(dp.central.rotation))
        dists[obs.label].append(d)
    counts = {label: np.histogram(np.asarray(vals), bins=edges)[0]
              for label, vals in dists.items()}
    return Histogram(bin_edges=edges, counts=counts, skipped=skipped)
