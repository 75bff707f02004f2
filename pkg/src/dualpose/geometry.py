"""3D geometry primitives: rotations, pinhole projection, orientation vectors.

Conventions: rotations are camera-from-world 3x3 matrices; Rodrigues vectors
are axis*angle with the canonical representative satisfying ||r|| <= pi.
Image x grows right, y grows down; world w grows into the head, so a frontal
face at identity rotation projects upright.
"""

from dataclasses import dataclass, field

import numpy as np

from ._accel.kernels import _rodrigues_matrix
from .exceptions import BehindCameraError, InvalidRotationError

EPS_DEPTH = 1e-9
ROTATION_ATOL = 1e-9


@dataclass
class CameraIntrinsics:
    """Pinhole camera with zero skew and zero distortion. Units: pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        for v in (self.fx, self.fy, self.cx, self.cy):
            if not np.isfinite(v):
                raise ValueError("camera intrinsics must be finite")


@dataclass
class Pose:
    """Rigid camera-from-world transform: x_cam = rotation @ x_world + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if self.rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {self.rotation.shape}")
        if not np.all(np.isfinite(self.rotation)) or not np.all(np.isfinite(self.translation)):
            raise ValueError("pose entries must be finite")

    @staticmethod
    def identity(distance: float = 1.0) -> "Pose":
        return Pose(np.eye(3), np.array([0.0, 0.0, distance]))


def validate_rotation(R: np.ndarray, atol: float = ROTATION_ATOL) -> np.ndarray:
    """Check orthonormality and det +1; returns the matrix as float64."""
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3):
        raise InvalidRotationError(f"rotation must be 3x3, got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidRotationError("rotation contains non-finite entries")
    err = np.max(np.abs(R.T @ R - np.eye(3)))
    if err > atol:
        raise InvalidRotationError(f"matrix is not orthonormal (max |R'R - I| = {err:.3e})")
    det = np.linalg.det(R)
    if abs(det - 1.0) > max(atol, 1e-9):
        raise InvalidRotationError(f"determinant is {det:.12f}, expected +1 (reflection?)")
    return R


def rodrigues_to_matrix(r: np.ndarray) -> np.ndarray:
    """Axis-angle vector (radians * unit axis) to rotation matrix."""
    r = np.asarray(r, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(r)):
        raise ValueError("rodrigues vector must be finite")
    return _rodrigues_matrix(r)


def matrix_to_rodrigues(R: np.ndarray) -> np.ndarray:
    """Rotation matrix to the canonical Rodrigues vector with ||r|| <= pi.

    Goes through a quaternion (largest-pivot extraction), which stays
    accurate for angles near pi. At exactly pi the sign ambiguity is fixed
    by making the first nonzero axis component positive.
    """
    R = validate_rotation(R)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] >= R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    q /= np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    w = q[0]
    v = q[1:]
    sin_half = np.linalg.norm(v)
    if sin_half < 1e-12:
        return 2.0 * v
    theta = 2.0 * np.arctan2(sin_half, w)
    axis = v / sin_half
    if theta > np.pi - 2e-13:
        # Numerically indistinguishable from a half-turn, where +-axis encode
        # the same matrix: pick the representative whose first nonzero
        # component is positive.
        for comp in axis:
            if abs(comp) > 1e-12:
                if comp < 0.0:
                    axis = -axis
                break
    return axis * theta


def project(points: np.ndarray, pose: Pose, cam: CameraIntrinsics) -> np.ndarray:
    """Project world points through the pinhole model; (3,) -> (2,) or (n,3) -> (n,2).

    Raises BehindCameraError if any camera-frame depth is <= EPS_DEPTH.
    """
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 3:
        raise ValueError(f"expected points with 3 components, got shape {pts.shape}")
    c = pts @ pose.rotation.T + pose.translation
    z = c[:, 2]
    if np.any(z <= EPS_DEPTH):
        raise BehindCameraError(
            f"{int(np.sum(z <= EPS_DEPTH))} point(s) behind camera (min depth {z.min():.3e})")
    out = np.empty((pts.shape[0], 2))
    out[:, 0] = cam.fx * c[:, 0] / z + cam.cx
    out[:, 1] = cam.fy * c[:, 1] / z + cam.cy
    return out[0] if single else out


def head_orientation(R: np.ndarray) -> np.ndarray:
    """Unit vector the head points along: the reversed rotation applied to the
    world w-axis, i.e. R's third row."""
    R = validate_rotation(R)
    v = R[2, :].copy()
    return v / np.linalg.norm(v)


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - cos(angle between a and b); 0 parallel, 1 orthogonal, 2 antiparallel."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine distance is undefined for zero-norm vectors")
    d = 1.0 - float(np.dot(a, b)) / (na * nb)
    return float(min(max(d, 0.0), 2.0))


def geodesic_angle(Ra: np.ndarray, Rb: np.ndarray) -> float:
    """Rotation angle (radians) taking Ra to Rb."""
    Rrel = np.asarray(Ra).T @ np.asarray(Rb)
    c = (np.trace(Rrel) - 1.0) / 2.0
    return float(np.arccos(min(max(c, -1.0), 1.0)))
