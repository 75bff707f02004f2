"""Dual head poses per face and the pose-difference feature variants.

Each face gets two pose estimates: one from the whole-face landmark set and
one from the central region only. A spliced central face drags the central
estimate away from the whole-face estimate; the difference, in one of six
encodings, is the classification feature.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import DataError, DualposeError, PoseEstimationError
from .face_model import N_LANDMARKS, CanonicalFaceModel, central_indices, whole_face_indices
from .geometry import CameraIntrinsics, Pose, head_orientation, matrix_to_rodrigues
from .pnp import solve_pnp

LABELS = ("real", "fake", "unknown")
EPS_STD = 1e-12

# Perturbed central regions can sit in a shallow valley; give the solver more
# budget than its bare default before declaring non-convergence.
POSE_MAX_ITER = 300


@dataclass
class FaceObservation:
    """One detected face: 68 image landmarks plus provenance metadata."""

    id: str
    landmarks: np.ndarray
    image_width: int
    image_height: int
    label: str = "unknown"
    video_id: str | None = None

    def __post_init__(self):
        self.landmarks = np.asarray(self.landmarks, dtype=np.float64)
        if self.landmarks.shape != (N_LANDMARKS, 2):
            raise DataError(
                f"observation {self.id!r}: expected {N_LANDMARKS} landmarks, "
                f"got shape {self.landmarks.shape}")
        if not np.all(np.isfinite(self.landmarks)):
            raise DataError(f"observation {self.id!r}: non-finite landmark")
        if not (self.image_width > 0 and self.image_height > 0):
            raise DataError(f"observation {self.id!r}: image dimensions must be positive")
        if self.label not in LABELS:
            raise DataError(f"observation {self.id!r}: label must be one of {LABELS}")


@dataclass
class DualPose:
    """Whole-face and central-region pose estimates for one observation.

    Carries the observation's identity so downstream feature vectors can be
    traced back to frames and videos.
    """

    whole: Pose
    central: Pose
    whole_rms: float
    central_rms: float
    id: str | None = None
    video_id: str | None = None
    label: str = "unknown"


class FeatureVariant(Enum):
    """The six pose-difference encodings; value strings are the CLI names."""

    ORIENT = "orient"
    RVEC = "rvec"
    RMAT = "rmat"
    ORIENT_T = "orient-t"
    RVEC_T = "rvec-t"
    RMAT_T = "rmat-t"

    @property
    def dim(self) -> int:
        return _VARIANT_DIMS[self]

    @property
    def with_translation(self) -> bool:
        return self in (FeatureVariant.ORIENT_T, FeatureVariant.RVEC_T, FeatureVariant.RMAT_T)

    @staticmethod
    def from_string(s: str) -> "FeatureVariant":
        for v in FeatureVariant:
            if v.value == s:
                return v
        raise DataError(f"unknown feature variant {s!r}; "
                        f"choose from {[v.value for v in FeatureVariant]}")


_VARIANT_DIMS = {
    FeatureVariant.ORIENT: 3,
    FeatureVariant.RVEC: 3,
    FeatureVariant.RMAT: 9,
    FeatureVariant.ORIENT_T: 6,
    FeatureVariant.RVEC_T: 6,
    FeatureVariant.RMAT_T: 12,
}


@dataclass
class FeatureVector:
    variant: FeatureVariant
    values: np.ndarray
    id: str | None = None
    video_id: str | None = None
    label: str = "unknown"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.values.shape[0] != self.variant.dim:
            raise DataError(
                f"feature {self.id!r}: variant {self.variant.value} expects "
                f"dim {self.variant.dim}, got {self.values.shape[0]}")
        if not np.all(np.isfinite(self.values)):
            raise DataError(f"feature {self.id!r}: non-finite value")


@dataclass
class StandardizationStats:
    """Per-dimension mean and population standard deviation (floored)."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.std = np.asarray(self.std, dtype=np.float64).reshape(-1)
        if self.mean.shape != self.std.shape:
            raise DataError("mean/std length mismatch")
        if np.any(self.std < EPS_STD):
            raise DataError(f"std components must be >= {EPS_STD}")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def default_intrinsics(width: float, height: float) -> CameraIntrinsics:
    """Focal length approximated by the image width, center at the image center."""
    if not (width > 0 and height > 0):
        raise DataError(f"image dimensions must be positive, got {width}x{height}")
    return CameraIntrinsics(fx=float(width), fy=float(width),
                            cx=width / 2.0, cy=height / 2.0)


def estimate_dual_pose(obs: FaceObservation, model: CanonicalFaceModel) -> DualPose:
    """Solve the whole-face pose, then the central-region pose warm-started
    from it. Raises PoseEstimationError tagged with the failing region."""
    cam = default_intrinsics(obs.image_width, obs.image_height)
    whole_idx = whole_face_indices()
    central_idx = central_indices()

    def run(region: str, idx, init):
        world = model.select(idx)
        image = obs.landmarks[idx.zero_based()]
        try:
            sol = solve_pnp(world, image, cam, init=init, max_iter=POSE_MAX_ITER)
        except DualposeError as e:
            raise PoseEstimationError(region, str(e)) from e
        if not sol.converged:
            raise PoseEstimationError(
                region, f"solver did not converge in {sol.iterations} iterations "
                        f"(rms {sol.final_rms_reprojection_error:.3g} px)")
        if sol.pose.translation[2] <= 0:
            raise PoseEstimationError(region, "estimated face is behind the camera")
        return sol

    whole_sol = run("whole", whole_idx, None)
    central_sol = run("central", central_idx, whole_sol.pose)
    return DualPose(
        whole=whole_sol.pose,
        central=central_sol.pose,
        whole_rms=whole_sol.final_rms_reprojection_error,
        central_rms=central_sol.final_rms_reprojection_error,
        id=obs.id,
        video_id=obs.video_id,
        label=obs.label,
    )


def estimate_dual_poses(observations, model: CanonicalFaceModel):
    """Batch helper: returns (dual_poses, failures) where failures is a list
    of (observation id, error). Bad records are skipped, not fatal."""
    poses: list[DualPose] = []
    failures: list[tuple[str, Exception]] = []
    for obs in observations:
        try:
            poses.append(estimate_dual_pose(obs, model))
        except DualposeError as e:
            failures.append((obs.id, e))
    return poses, failures


def make_feature(dp: DualPose, variant: FeatureVariant) -> FeatureVector:
    """Assemble one pose-difference feature vector.

    orient: difference of head-orientation unit vectors (3);
    rvec: difference of Rodrigues vectors (3);
    rmat: row-major flattened difference of rotation matrices (9);
    *-t variants append the translation difference (3 more).
    """
    if variant in (FeatureVariant.ORIENT, FeatureVariant.ORIENT_T):
        base = head_orientation(dp.whole.rotation) - head_orientation(dp.central.rotation)
    elif variant in (FeatureVariant.RVEC, FeatureVariant.RVEC_T):
        base = matrix_to_rodrigues(dp.whole.rotation) - matrix_to_rodrigues(dp.central.rotation)
    else:
        base = (dp.whole.rotation - dp.central.rotation).reshape(-1)
    if variant.with_translation:
        base = np.concatenate([base, dp.whole.translation - dp.central.translation])
    return FeatureVector(variant=variant, values=base,
                         id=dp.id, video_id=dp.video_id, label=dp.label)


def fit_standardization(features: list[FeatureVector]) -> StandardizationStats:
    """Per-dimension mean and population std over a uniform-variant sample."""
    if not features:
        raise DataError("cannot fit standardization on an empty feature list")
    variant = features[0].variant
    if any(f.variant is not variant for f in features):
        raise DataError("features mix variants; standardization needs a uniform sample")
    X = np.stack([f.values for f in features])
    mean = X.mean(axis=0)
    std = np.maximum(X.std(axis=0), EPS_STD)
    return StandardizationStats(mean=mean, std=std)


def apply_standardization(f: FeatureVector, s: StandardizationStats) -> FeatureVector:
    if f.values.shape[0] != s.dim:
        raise DataError(f"feature dim {f.values.shape[0]} != stats dim {s.dim}")
    return FeatureVector(variant=f.variant, values=(f.values - s.mean) / s.std,
                         id=f.id, video_id=f.video_id, label=f.label)
