import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualpose.exceptions import BehindCameraError, InvalidRotationError
from dualpose.geometry import (CameraIntrinsics, Pose, cosine_distance, geodesic_angle,
                               head_orientation, matrix_to_rodrigues, project,
                               rodrigues_to_matrix)

from .conftest import random_rodrigues, random_rotation


class TestProject:
    def test_optical_axis_hits_optical_center(self):
        cam = CameraIntrinsics(100, 100, 50, 50)
        out = project(np.array([0.0, 0.0, 0.0]), Pose(np.eye(3), [0, 0, 1]), cam)
        np.testing.assert_allclose(out, [50.0, 50.0])

    def test_unit_offset(self):
        cam = CameraIntrinsics(100, 100, 50, 50)
        out = project(np.array([1.0, 0.0, 0.0]), Pose(np.eye(3), [0, 0, 2]), cam)
        np.testing.assert_allclose(out, [100.0, 50.0])

    def test_matches_independent_evaluation(self):
        # expected values frozen from a straight-line scipy-based evaluation
        # of the rotation + pinhole chain
        cam = CameraIntrinsics(640, 640, 320, 240)
        pose = Pose(rodrigues_to_matrix([0.1, 0.2, 0.3]), [0.5, -0.3, 8.0])
        out = project(np.array([0.3, -0.2, 0.1]), pose, cam)
        np.testing.assert_allclose(out, [388.51698075519437, 207.5893638786304],
                                   rtol=0, atol=1e-9)

    def test_behind_camera_raises(self):
        cam = CameraIntrinsics(100, 100, 50, 50)
        with pytest.raises(BehindCameraError):
            project(np.array([0.0, 0.0, 0.0]), Pose(np.eye(3), [0, 0, -1]), cam)
        with pytest.raises(BehindCameraError):
            project(np.array([0.0, 0.0, 0.0]), Pose(np.eye(3), [0, 0, 0]), cam)

    def test_batch_shape(self, rng):
        cam = CameraIntrinsics(100, 100, 50, 50)
        pts = rng.normal(size=(7, 3))
        out = project(pts, Pose(np.eye(3), [0, 0, 10]), cam)
        assert out.shape == (7, 2)


class TestRodrigues:
    def test_zero_gives_identity(self):
        np.testing.assert_array_equal(rodrigues_to_matrix([0.0, 0.0, 0.0]), np.eye(3))

    def test_quarter_turn_about_z(self):
        expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(rodrigues_to_matrix([0, 0, np.pi / 2]), expected,
                                   atol=1e-15)
        np.testing.assert_allclose(matrix_to_rodrigues(expected), [0, 0, np.pi / 2],
                                   atol=1e-12)

    def test_identity_to_zero(self):
        np.testing.assert_array_equal(matrix_to_rodrigues(np.eye(3)), np.zeros(3))

    def test_antipodal_about_x(self):
        R = np.diag([1.0, -1.0, -1.0])
        np.testing.assert_allclose(matrix_to_rodrigues(R), [np.pi, 0, 0], atol=1e-12)

    def test_antipodal_sign_convention(self):
        # pi rotation about -x must still return the +x representative
        R = rodrigues_to_matrix([-np.pi, 0, 0])
        np.testing.assert_allclose(matrix_to_rodrigues(R), [np.pi, 0, 0], atol=1e-9)

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=150, deadline=None)
    def test_roundtrip_property(self, seed):
        rng = np.random.default_rng(seed)
        r = random_rodrigues(rng)
        back = matrix_to_rodrigues(rodrigues_to_matrix(r))
        assert np.max(np.abs(back - r)) < 1e-10

    def test_roundtrip_near_pi(self, rng):
        for _ in range(200):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            r = axis * (np.pi - 10 ** rng.uniform(-12, -6))
            back = matrix_to_rodrigues(rodrigues_to_matrix(r))
            assert np.max(np.abs(back - r)) < 1e-10

    def test_tiny_angles(self, rng):
        for mag in (1e-14, 1e-10, 1e-8, 1e-5):
            r = np.array([mag, 0.0, 0.0])
            back = matrix_to_rodrigues(rodrigues_to_matrix(r))
            assert np.max(np.abs(back - r)) < 1e-12

    def test_orthonormality_of_outputs(self, rng):
        for _ in range(100):
            R = rodrigues_to_matrix(random_rodrigues(rng))
            assert np.max(np.abs(R.T @ R - np.eye(3))) <= 1e-9
            assert abs(np.linalg.det(R) - 1.0) <= 1e-9

    def test_invalid_rotation_rejected(self):
        with pytest.raises(InvalidRotationError):
            matrix_to_rodrigues(np.eye(3) * 1.01)
        with pytest.raises(InvalidRotationError):
            matrix_to_rodrigues(np.diag([1.0, 1.0, -1.0]))  # reflection


class TestHeadOrientation:
    def test_identity(self):
        np.testing.assert_array_equal(head_orientation(np.eye(3)), [0.0, 0.0, 1.0])

    def test_pi_about_x(self):
        R = rodrigues_to_matrix([np.pi, 0, 0])
        np.testing.assert_allclose(head_orientation(R), [0.0, 0.0, -1.0], atol=1e-15)

    def test_unit_norm(self, rng):
        for _ in range(100):
            v = head_orientation(random_rotation(rng))
            assert abs(np.linalg.norm(v) - 1.0) < 1e-9

    def test_equals_transpose_action(self, rng):
        R = random_rotation(rng)
        np.testing.assert_allclose(head_orientation(R), R.T @ np.array([0, 0, 1.0]),
                                   atol=1e-15)


class TestCosineDistance:
    def test_parallel(self):
        assert cosine_distance([0, 0, 1.0], [0, 0, 1.0]) == 0.0

    def test_orthogonal(self):
        assert cosine_distance([1.0, 0, 0], [0, 1.0, 0]) == 1.0

    def test_antiparallel(self):
        assert cosine_distance([0, 0, 1.0], [0, 0, -1.0]) == 2.0

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError):
            cosine_distance([0.0, 0.0, 0.0], [1.0, 0, 0])

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1),
           st.floats(min_value=0.01, max_value=100.0),
           st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=100, deadline=None)
    def test_range_symmetry_scale_invariance(self, seed, sa, sb):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        d = cosine_distance(a, b)
        assert 0.0 <= d <= 2.0
        assert cosine_distance(b, a) == pytest.approx(d, abs=1e-12)
        assert cosine_distance(sa * a, sb * b) == pytest.approx(d, abs=1e-9)


def test_geodesic_angle_roundtrip(rng):
    R = random_rotation(rng)
    assert geodesic_angle(R, R) == pytest.approx(0.0, abs=1e-7)
    Rb = R @ rodrigues_to_matrix([0.3, 0, 0])
    assert geodesic_angle(R, Rb) == pytest.approx(0.3, abs=1e-12)
