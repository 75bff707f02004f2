"""Soft-margin RBF SVM trained by pairwise dual optimization.

The trainer is a maximal-violating-pair solver with second-order working-set
selection, run to a KKT gap of 1e-3. It is deterministic: no randomness,
ties in the selection resolve to the lowest index. Grid search uses
stratified cross-validation scored by AUROC.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _accel
from .evaluation import auroc_from_arrays
from .exceptions import DataError, SchemaError
from .features import EPS_STD, FeatureVariant, StandardizationStats

KKT_TOL = 1e-3
SV_EPS = 1e-9
MAX_SMO_ITER = 2_000_000

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0, 1000.0)
DEFAULT_GAMMA_GRID = (0.001, 0.01, 0.1, 1.0, 10.0)

MODEL_FORMAT_VERSION = 1


@dataclass
class LabeledSample:
    x: np.ndarray
    y: int  # +1 fake, -1 real

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.x)):
            raise DataError("sample features must be finite")
        if self.y not in (1, -1):
            raise DataError(f"label must be +1 or -1, got {self.y}")


@dataclass
class SvmParams:
    c: float
    gamma: float

    def __post_init__(self):
        if not (self.c > 0 and self.gamma > 0):
            raise DataError(f"c and gamma must be positive, got c={self.c}, gamma={self.gamma}")


@dataclass
class SvmModel:
    """Trained classifier plus the standardization fitted on its training data.

    support_vectors are stored standardized; decision_score therefore takes
    raw feature vectors and standardizes them internally.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray  # alpha_i * y_i
    bias: float
    params: SvmParams
    standardization: StandardizationStats
    variant: FeatureVariant | None = None

    def __post_init__(self):
        self.support_vectors = np.asarray(self.support_vectors, dtype=np.float64)
        self.dual_coefs = np.asarray(self.dual_coefs, dtype=np.float64).reshape(-1)
        if self.support_vectors.ndim != 2:
            raise DataError("support_vectors must be a 2-d array")
        if self.support_vectors.shape[0] != self.dual_coefs.shape[0]:
            raise DataError("support vector / dual coefficient count mismatch")
        if self.support_vectors.shape[0] == 0:
            raise DataError("model has no support vectors")
        a = np.abs(self.dual_coefs)
        if np.any(a <= 0) or np.any(a > self.params.c * (1 + 1e-9)):
            raise DataError("dual coefficients must satisfy 0 < |alpha| <= c")
        if abs(self.dual_coefs.sum()) > 1e-6:
            raise DataError(f"sum of alpha_i*y_i is {self.dual_coefs.sum():.3e}, expected 0")


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||a - b||^2); 1 iff a == b."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise DataError(f"kernel input dim mismatch: {a.shape} vs {b.shape}")
    if gamma <= 0:
        raise DataError("gamma must be positive")
    d = a - b
    return float(np.exp(-gamma * np.dot(d, d)))


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.sum(A * A, axis=1)[:, None]
    bb = np.sum(B * B, axis=1)[None, :]
    return np.maximum(aa + bb - 2.0 * (A @ B.T), 0.0)


def _split_xy(data: list[LabeledSample]):
    if not data:
        raise DataError("no training samples")
    dim = data[0].x.shape[0]
    if any(s.x.shape[0] != dim for s in data):
        raise DataError("training samples have inconsistent dimensions")
    X = np.stack([s.x for s in data])
    y = np.array([s.y for s in data], dtype=np.float64)
    return X, y


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Lexicographic sample order. The solver stops at a finite KKT gap, so
    its near-optimum depends on the traversal order; sorting first makes
    training exactly invariant to how the caller ordered the samples."""
    keys = (y,) + tuple(X[:, k] for k in range(X.shape[1] - 1, -1, -1))
    return np.lexsort(keys)


def _standardize_matrix(X: np.ndarray) -> tuple[np.ndarray, StandardizationStats]:
    stats = StandardizationStats(mean=X.mean(axis=0),
                                 std=np.maximum(X.std(axis=0), EPS_STD))
    return (X - stats.mean) / stats.std, stats


def train(data: list[LabeledSample], params: SvmParams,
          variant: FeatureVariant | None = None,
          tol: float = KKT_TOL, max_iter: int = MAX_SMO_ITER) -> SvmModel:
    """Fit the dual problem on raw samples; standardization is fitted here on
    the given data and bundled into the model."""
    X, y = _split_xy(data)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DataError("training data must contain both classes")
    order = _canonical_order(X, y)
    X, y = X[order], y[order]
    Xs, stats = _standardize_matrix(X)
    K = np.exp(-params.gamma * _sq_dists(Xs, Xs))
    return _train_on_kernel(Xs, y, K, params, stats, variant, tol, max_iter)


def _train_on_kernel(Xs, y, K, params: SvmParams, stats: StandardizationStats,
                     variant, tol, max_iter) -> SvmModel:
    alpha, G, iters, gap = _accel.smo_solve(np.ascontiguousarray(K), y,
                                            float(params.c), tol, max_iter)
    bias = _bias_from_solution(alpha, G, y, params.c)
    sv = np.abs(alpha) > SV_EPS
    if not np.any(sv):
        raise DataError("training produced no support vectors")
    return SvmModel(
        support_vectors=Xs[sv],
        dual_coefs=alpha[sv] * y[sv],
        bias=bias,
        params=params,
        standardization=stats,
        variant=variant,
    )


def _bias_from_solution(alpha, G, y, c) -> float:
    # KKT: free vectors satisfy y_t * f(x_t) = 1 exactly at the optimum.
    yG = y * G
    free = (alpha > 0) & (alpha < c)
    if np.any(free):
        return float(-np.mean(yG[free]))
    upper = alpha >= c
    lower = alpha <= 0
    ub = np.inf
    lb = -np.inf
    sel_ub = (upper & (y < 0)) | (lower & (y > 0))
    sel_lb = (upper & (y > 0)) | (lower & (y < 0))
    if np.any(sel_ub):
        ub = np.min(yG[sel_ub])
    if np.any(sel_lb):
        lb = np.max(yG[sel_lb])
    return float(-(ub + lb) / 2.0)


def decision_scores(m: SvmModel, X: np.ndarray) -> np.ndarray:
    """Decision values for raw (un-standardized) row vectors, vectorized."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != m.standardization.dim:
        raise DataError(f"feature dim {X.shape[1]} != model dim {m.standardization.dim}")
    Xs = (X - m.standardization.mean) / m.standardization.std
    K = np.exp(-m.params.gamma * _sq_dists(Xs, m.support_vectors))
    return K @ m.dual_coefs + m.bias


def decision_score(m: SvmModel, x: np.ndarray) -> float:
    """Signed score for one raw vector; sign is the class (+ fake), magnitude
    ranks confidence."""
    return float(decision_scores(m, np.asarray(x).reshape(1, -1))[0])


def stratified_folds(y: np.ndarray, folds: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic stratified k-fold assignment; returns per-fold index arrays."""
    y = np.asarray(y)
    if folds < 2:
        raise DataError("need at least 2 folds")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xCF)))
    assignments: list[list[int]] = [[] for _ in range(folds)]
    for cls in (1, -1):
        idx = np.flatnonzero(y == cls)
        if idx.shape[0] < folds:
            raise DataError(
                f"class {cls:+d} has {idx.shape[0]} samples; cannot build {folds} folds")
        rng.shuffle(idx)
        for pos, sample in enumerate(idx):
            assignments[pos % folds].append(int(sample))
    return [np.sort(np.array(a, dtype=np.intp)) for a in assignments]


def cross_val_auroc(data: list[LabeledSample], params: SvmParams, folds: int,
                    seed: int = 0) -> float:
    """Mean validation AUROC over stratified folds for one parameter cell."""
    X, y = _split_xy(data)
    fold_idx = stratified_folds(y, folds, seed)
    scores = []
    for val in fold_idx:
        mask = np.ones(y.shape[0], dtype=bool)
        mask[val] = False
        model = train([LabeledSample(x, int(lbl)) for x, lbl in zip(X[mask], y[mask])],
                      params)
        s = decision_scores(model, X[val])
        scores.append(auroc_from_arrays(s, (y[val] > 0).astype(int)))
    return float(np.mean(scores))


def _default_jobs() -> int:
    return max(1, min(4, os.cpu_count() or 1))


def grid_search_cv(data: list[LabeledSample], grid: list[SvmParams], folds: int,
                   seed: int = 0, variant: FeatureVariant | None = None,
                   n_jobs: int | None = None) -> tuple[SvmParams, SvmModel]:
    """Pick the grid cell with the best mean CV AUROC (ties: smaller c, then
    smaller gamma) and retrain on all data with it.

    (fold, gamma) tasks run on a thread pool; each task shares one kernel
    matrix across the c values of that gamma. Results do not depend on the
    scheduling order.
    """
    if not grid:
        raise DataError("empty parameter grid")
    X, y = _split_xy(data)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DataError("training data must contain both classes")
    fold_idx = stratified_folds(y, folds, seed)
    n_jobs = _default_jobs() if n_jobs is None else max(1, n_jobs)

    # Per fold: standardize on the training part once, reuse the squared
    # distances for every gamma.
    fold_ctx = []
    for val in fold_idx:
        mask = np.ones(y.shape[0], dtype=bool)
        mask[val] = False
        Xtr, ytr = X[mask], y[mask]
        order = _canonical_order(Xtr, ytr)
        Xtr, ytr = Xtr[order], ytr[order]
        Xs, stats = _standardize_matrix(Xtr)
        fold_ctx.append((ytr, val, Xs, stats, _sq_dists(Xs, Xs)))

    gammas: list[float] = []
    for p in grid:
        if p.gamma not in gammas:
            gammas.append(p.gamma)
    by_gamma = {g: [p for p in grid if p.gamma == g] for g in gammas}

    def run_task(fold_id: int, gamma: float):
        ytr, val, Xs, stats, D2 = fold_ctx[fold_id]
        K = np.exp(-gamma * D2)
        labels = (y[val] > 0).astype(int)
        out = []
        for params in by_gamma[gamma]:
            model = _train_on_kernel(Xs, ytr, K, params, stats, variant,
                                     KKT_TOL, MAX_SMO_ITER)
            s = decision_scores(model, X[val])
            out.append((params, auroc_from_arrays(s, labels)))
        return out

    tasks = [(f, g) for g in gammas for f in range(len(fold_ctx))]
    scores: dict[tuple[float, float], list[float]] = {(p.c, p.gamma): [] for p in grid}
    if n_jobs == 1:
        task_results = [run_task(f, g) for f, g in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            task_results = list(pool.map(lambda fg: run_task(*fg), tasks))
    for chunk in task_results:
        for params, score in chunk:
            scores[(params.c, params.gamma)].append(score)

    results = [(float(np.mean(scores[(p.c, p.gamma)])), p) for p in grid]
    best_score, best_params = max(results, key=lambda r: (r[0], -r[1].c, -r[1].gamma))
    final = train(data, best_params, variant=variant)
    return best_params, final


def default_grid() -> list[SvmParams]:
    return [SvmParams(c=c, gamma=g) for c in DEFAULT_C_GRID for g in DEFAULT_GAMMA_GRID]


def save_model(m: SvmModel, path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "variant": m.variant.value if m.variant is not None else None,
        "params": {"c": m.params.c, "gamma": m.params.gamma},
        "standardization": {"mean": m.standardization.mean.tolist(),
                            "std": m.standardization.std.tolist()},
        "support_vectors": m.support_vectors.tolist(),
        "dual_coefs": m.dual_coefs.tolist(),
        "bias": m.bias,
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_model(path) -> SvmModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid model JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("model file must be a JSON object")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {version!r}", field="format_version")
    for key in ("params", "standardization", "support_vectors", "dual_coefs", "bias"):
        if key not in doc:
            raise SchemaError("missing required key", field=key)
    try:
        params = SvmParams(**doc["params"])
        stats = StandardizationStats(mean=np.asarray(doc["standardization"]["mean"]),
                                     std=np.asarray(doc["standardization"]["std"]))
        variant = (FeatureVariant.from_string(doc["variant"])
                   if doc.get("variant") is not None else None)
        return SvmModel(
            support_vectors=np.asarray(doc["support_vectors"], dtype=np.float64),
            dual_coefs=np.asarray(doc["dual_coefs"], dtype=np.float64),
            bias=float(doc["bias"]),
            params=params,
            standardization=stats,
            variant=variant,
        )
    except (DataError, TypeError, KeyError, ValueError) as e:
        raise SchemaError(f"model file failed validation: {e}") from e
