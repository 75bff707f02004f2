"""Canonical 3D landmark model and the landmark-index conventions.

Landmarks are 1-indexed in the standard 68-point numbering: 1-17 jaw
contour, 18-27 brows, 28-36 nose, 37-48 eyes, 49-68 mouth. Pose estimation
uses two subsets: the central face region (brows, nose, mouth corners) and
the whole face (central plus the jaw contour). Eye and inner-mouth points
are never used for pose.
"""

import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .exceptions import SchemaError

N_LANDMARKS = 68
_COPLANARITY_RATIO = 1e-8
_CENTROID_TOL = 1e-6

DEFAULT_MODEL_RESOURCE = "standard_face_68.json"


@dataclass(frozen=True)
class LandmarkIndexSet:
    """Strictly increasing 1-indexed landmark indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = self.indices
        if not idx:
            raise ValueError("index set must not be empty")
        for a in idx:
            if not (1 <= a <= N_LANDMARKS):
                raise ValueError(f"landmark index {a} outside 1..{N_LANDMARKS}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("landmark indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    @staticmethod
    def of(values: Iterable[int]) -> "LandmarkIndexSet":
        return LandmarkIndexSet(tuple(int(v) for v in values))


_CENTRAL = LandmarkIndexSet.of(list(range(18, 37)) + [49, 55])
_WHOLE = LandmarkIndexSet.of(list(range(1, 37)) + [49, 55])


def central_indices() -> LandmarkIndexSet:
    """Brows, nose, and mouth corners: 18-36 plus 49 and 55 (21 landmarks)."""
    return _CENTRAL


def whole_face_indices() -> LandmarkIndexSet:
    """Central region plus the jaw contour: 1-36 plus 49 and 55 (38 landmarks)."""
    return _WHOLE


@dataclass(frozen=True)
class CanonicalFaceModel:
    """68 world-coordinate points of a standard face, centroid at the origin.

    Units are arbitrary "model units"; the projective formulation absorbs
    global scale into the translation.
    """

    name: str
    version: str
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.float64))
        _validate_points(self.points)

    def select(self, idx: LandmarkIndexSet) -> np.ndarray:
        return self.points[idx.zero_based()]


def _validate_points(points: np.ndarray) -> None:
    if points.shape != (N_LANDMARKS, 3):
        raise SchemaError(
            f"expected {N_LANDMARKS} points of 3 coordinates, got shape {points.shape}",
            field="points")
    if not np.all(np.isfinite(points)):
        bad = int(np.argwhere(~np.all(np.isfinite(points), axis=1))[0][0])
        raise SchemaError("non-finite coordinate", field=f"points[{bad}]")
    centroid = points.mean(axis=0)
    if np.max(np.abs(centroid)) > _CENTROID_TOL:
        raise SchemaError(
            f"model centroid {centroid.tolist()} is not at the origin "
            f"(tolerance {_CENTROID_TOL})", field="points")
    s = np.linalg.svd(points - centroid, compute_uv=False)
    if s[2] <= _COPLANARITY_RATIO * s[0]:
        raise SchemaError("points are coplanar (rank of centered coordinates < 3)",
                          field="points")


def select(model: CanonicalFaceModel, idx: LandmarkIndexSet) -> np.ndarray:
    """Model points for the given indices, in index order; shape (len(idx), 3)."""
    return model.select(idx)


def load_model(source) -> CanonicalFaceModel:
    """Parse and validate a canonical model from a byte stream, bytes, or path.

    Format: JSON object {"name", "version", "points": [[u, v, w] x 68]} in
    1-indexed landmark order.
    """
    if isinstance(source, (str, Path)):
        raw = Path(source).read_bytes()
    elif isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("model file must be a JSON object")
    for key, kind in (("name", str), ("version", str), ("points", list)):
        if key not in doc:
            raise SchemaError("missing required key", field=key)
        if not isinstance(doc[key], kind):
            raise SchemaError(f"expected {kind.__name__}", field=key)
    pts = doc["points"]
    if len(pts) != N_LANDMARKS:
        raise SchemaError(f"expected {N_LANDMARKS} points, got {len(pts)}", field="points")
    for i, p in enumerate(pts):
        if not (isinstance(p, list) and len(p) == 3
                and all(isinstance(v, (int, float)) for v in p)):
            raise SchemaError("each point must be a [u, v, w] number triple",
                              field=f"points[{i}]")
    return CanonicalFaceModel(name=doc["name"], version=doc["version"],
                              points=np.asarray(pts, dtype=np.float64))


def serialize(model: CanonicalFaceModel) -> bytes:
    """Inverse of load_model; coordinates round-trip bit-exactly."""
    doc = {
        "name": model.name,
        "version": model.version,
        "points": [[float(u), float(v), float(w)] for u, v, w in model.points],
    }
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def default_model() -> CanonicalFaceModel:
    """The bundled mean-face geometry (see tools/gen_face_model.py)."""
    data = resources.files("dualpose").joinpath("data", DEFAULT_MODEL_RESOURCE).read_bytes()
    return load_model(io.BytesIO(data))
