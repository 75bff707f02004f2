"""Pose from 2D-3D correspondences: damped least squares over (rodrigues, t).

The solver minimizes the sum of squared reprojection errors. Points that a
trial step pushes behind the camera contribute a large constant penalty
instead of aborting, so the damping schedule can retreat.
"""

from dataclasses import dataclass

import numpy as np

from . import _accel
from .exceptions import BehindCameraError, DataError, InsufficientCorrespondencesError
from .geometry import EPS_DEPTH, CameraIntrinsics, Pose, matrix_to_rodrigues, rodrigues_to_matrix

LM_LAMBDA0 = 1e-3
LM_MAX_ITER = 100
LM_STEP_TOL = 1e-10
LM_GRAD_TOL = 1e-10
PENALTY = 1e6

MIN_CORRESPONDENCES = 4
_MIN_PIXEL_SPAN = 2.0


@dataclass
class PnpSolution:
    """Solver output plus diagnostics. cost_history holds the accepted-step
    costs (sum of squared residuals), which is non-increasing."""

    pose: Pose
    final_rms_reprojection_error: float
    iterations: int
    converged: bool
    cost_history: np.ndarray


def _as_points(arr, name: str, width: int) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != width:
        raise DataError(f"{name} must have shape (n, {width}), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise DataError(f"{name} contains non-finite values")
    return np.ascontiguousarray(out)


def default_init(world: np.ndarray, image: np.ndarray, cam: CameraIntrinsics) -> Pose:
    """Identity rotation at the depth where the model's bounding box roughly
    fills the observed landmark bounding box."""
    span_w = max(np.ptp(world[:, 0]), np.ptp(world[:, 1]))
    span_i = max(np.ptp(image[:, 0]), np.ptp(image[:, 1]))
    if span_i < _MIN_PIXEL_SPAN:
        raise DataError(
            f"landmark spread {span_i:.3f} px is too small to constrain a pose")
    d0 = cam.fx * span_w / span_i
    d0 = max(d0, 2.5 * float(np.max(np.abs(world[:, 2]))) + 1e-6)
    return Pose(np.eye(3), np.array([0.0, 0.0, d0]))


def reprojection_residual_jacobian(world, image, cam: CameraIntrinsics, rvec, tvec):
    """Residuals (pred - obs, x/y interleaved) and the analytic Jacobian wrt
    (rodrigues, translation). Exposed for derivative checking."""
    world = _as_points(world, "world points", 3)
    image = _as_points(image, "image points", 2)
    rvec = np.ascontiguousarray(rvec, dtype=np.float64)
    tvec = np.ascontiguousarray(tvec, dtype=np.float64)
    return _accel.pnp_residual_jacobian(world, image, cam.fx, cam.fy, cam.cx, cam.cy,
                                        rvec, tvec, EPS_DEPTH, PENALTY)


def solve_pnp(world, image, cam: CameraIntrinsics, init: Pose | None = None,
              max_iter: int = LM_MAX_ITER) -> PnpSolution:
    """Estimate the camera-from-world pose from n >= 4 correspondences.

    `init` defaults to `default_init`; it must place every world point at
    positive depth. Non-convergence is reported via the `converged` flag,
    not an exception.
    """
    world = _as_points(world, "world points", 3)
    image = _as_points(image, "image points", 2)
    if world.shape[0] != image.shape[0]:
        raise DataError(
            f"correspondence count mismatch: {world.shape[0]} world vs {image.shape[0]} image")
    if world.shape[0] < MIN_CORRESPONDENCES:
        raise InsufficientCorrespondencesError(
            f"need at least {MIN_CORRESPONDENCES} correspondences, got {world.shape[0]}")

    if init is None:
        init = default_init(world, image, cam)
    depths = world @ init.rotation.T[:, 2] + init.translation[2]
    if np.any(depths <= EPS_DEPTH):
        raise BehindCameraError("initial pose places points behind the camera")

    r0 = matrix_to_rodrigues(init.rotation)
    t0 = np.ascontiguousarray(init.translation, dtype=np.float64)
    r, t, rms, iters, converged, hist, hist_len = _accel.lm_pnp(
        world, image, cam.fx, cam.fy, cam.cx, cam.cy, r0, t0,
        LM_LAMBDA0, max_iter, LM_STEP_TOL, LM_GRAD_TOL, EPS_DEPTH, PENALTY)

    pose = Pose(rodrigues_to_matrix(r), t)
    return PnpSolution(
        pose=pose,
        final_rms_reprojection_error=float(rms),
        iterations=int(iters),
        converged=bool(converged),
        cost_history=np.asarray(hist[:hist_len]).copy(),
    )
