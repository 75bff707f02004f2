import numpy as np
import pytest

from dualpose.exceptions import (BehindCameraError, DataError,
                                 InsufficientCorrespondencesError)
from dualpose.geometry import (CameraIntrinsics, Pose, geodesic_angle, project,
                               rodrigues_to_matrix)
from dualpose.pnp import default_init, reprojection_residual_jacobian, solve_pnp

from .conftest import random_rodrigues

CAM = CameraIntrinsics(640, 640, 320, 240)


def noncoplanar_points(rng, n=8, spread=1.0):
    pts = rng.normal(size=(n, 3)) * spread
    pts[:, 2] *= 0.5
    return pts


class TestSolvePnp:
    def test_recovers_identity_pose(self, rng):
        world = noncoplanar_points(rng)
        pose = Pose(np.eye(3), [0, 0, 5.0])
        image = project(world, pose, CAM)
        sol = solve_pnp(world, image, CAM)
        assert sol.converged
        assert geodesic_angle(sol.pose.rotation, np.eye(3)) < 1e-5
        assert np.linalg.norm(sol.pose.translation - [0, 0, 5.0]) / 5.0 < 1e-5
        assert sol.final_rms_reprojection_error <= 1e-6

    def test_recovers_generating_pose(self, rng):
        world = noncoplanar_points(rng)
        pose = Pose(rodrigues_to_matrix([0.1, 0.2, 0.3]), [0.5, -0.3, 8.0])
        image = project(world, pose, CAM)
        sol = solve_pnp(world, image, CAM)
        assert sol.converged
        assert geodesic_angle(sol.pose.rotation, pose.rotation) < 1e-5
        assert (np.linalg.norm(sol.pose.translation - pose.translation)
                / np.linalg.norm(pose.translation)) < 1e-5

    def test_insufficient_correspondences(self, rng):
        world = noncoplanar_points(rng)[:3]
        image = np.zeros((3, 2))
        with pytest.raises(InsufficientCorrespondencesError):
            solve_pnp(world, image, CAM)

    def test_length_mismatch(self, rng):
        with pytest.raises(DataError):
            solve_pnp(noncoplanar_points(rng, 6), np.zeros((5, 2)), CAM)

    def test_nonfinite_rejected(self, rng):
        world = noncoplanar_points(rng, 6)
        image = np.zeros((6, 2))
        image[0, 0] = np.nan
        with pytest.raises(DataError):
            solve_pnp(world, image, CAM)

    def test_init_behind_camera_rejected(self, rng):
        world = noncoplanar_points(rng)
        pose = Pose(np.eye(3), [0, 0, 5.0])
        image = project(world, pose, CAM)
        with pytest.raises(BehindCameraError):
            solve_pnp(world, image, CAM, init=Pose(np.eye(3), [0, 0, -5.0]))

    def test_iterations_bounded(self, rng):
        world = noncoplanar_points(rng)
        image = project(world, Pose(np.eye(3), [0, 0, 5.0]), CAM)
        image = image + rng.normal(0, 5.0, image.shape)
        sol = solve_pnp(world, image, CAM, max_iter=30)
        assert sol.iterations <= 30

    def test_cost_history_monotone(self, rng):
        for trial in range(20):
            world = noncoplanar_points(rng)
            pose = Pose(rodrigues_to_matrix(random_rodrigues(rng, 0.5)),
                        [rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(4, 9)])
            image = project(world, pose, CAM) + rng.normal(0, 2.0, (world.shape[0], 2))
            sol = solve_pnp(world, image, CAM)
            assert np.all(np.diff(sol.cost_history) <= 0)

    def test_noisy_solution_is_least_squares_optimum(self, rng):
        # perturbing the returned pose must not reduce the cost
        world = noncoplanar_points(rng, 12)
        pose = Pose(rodrigues_to_matrix([0.2, -0.1, 0.05]), [0.2, 0.1, 6.0])
        image = project(world, pose, CAM) + rng.normal(0, 1.0, (12, 2))
        sol = solve_pnp(world, image, CAM)
        base = sol.cost_history[-1]

        def cost(rvec, tvec):
            res, _ = reprojection_residual_jacobian(world, image, CAM, rvec, tvec)
            return float(res @ res)

        from dualpose.geometry import matrix_to_rodrigues
        r0 = matrix_to_rodrigues(sol.pose.rotation)
        t0 = sol.pose.translation
        for _ in range(30):
            dr = rng.normal(0, 1e-4, 3)
            dt = rng.normal(0, 1e-4, 3)
            assert cost(r0 + dr, t0 + dt) >= base - 1e-9


class TestJacobian:
    def test_matches_central_differences(self, rng):
        # acceptance-level derivative check at random (pose, point) samples
        for _ in range(20):
            world = noncoplanar_points(rng, 6)
            r = random_rodrigues(rng, 0.8)
            t = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(4, 10)])
            image = rng.uniform(0, 640, (6, 2))
            _, J = reprojection_residual_jacobian(world, image, CAM, r, t)
            x0 = np.concatenate([r, t])
            Jfd = np.zeros_like(J)
            eps = 1e-6
            for k in range(6):
                xp = x0.copy(); xp[k] += eps
                xm = x0.copy(); xm[k] -= eps
                rp, _ = reprojection_residual_jacobian(world, image, CAM, xp[:3], xp[3:])
                rm, _ = reprojection_residual_jacobian(world, image, CAM, xm[:3], xm[3:])
                Jfd[:, k] = (rp - rm) / (2 * eps)
            rel = np.max(np.abs(J - Jfd)) / np.max(np.abs(Jfd))
            assert rel < 1e-5


class TestDefaultInit:
    def test_depth_scales_with_image_span(self, rng):
        world = noncoplanar_points(rng) * 0.5
        near = project(world, Pose(np.eye(3), [0, 0, 3.0]), CAM)
        far = project(world, Pose(np.eye(3), [0, 0, 9.0]), CAM)
        d_near = default_init(world, near, CAM).translation[2]
        d_far = default_init(world, far, CAM).translation[2]
        assert d_far > d_near
        assert d_near == pytest.approx(3.0, rel=0.5)

    def test_degenerate_spread_rejected(self, rng):
        world = noncoplanar_points(rng)
        image = np.full((8, 2), 17.0)
        with pytest.raises(DataError):
            default_init(world, image, CAM)
