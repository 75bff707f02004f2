import numpy as np
import pytest

from dualpose.exceptions import DataError, PoseEstimationError
from dualpose.face_model import central_indices, whole_face_indices
from dualpose.features import (FaceObservation, FeatureVariant, FeatureVector,
                               StandardizationStats, apply_standardization,
                               default_intrinsics, estimate_dual_pose, fit_standardization,
                               make_feature)
from dualpose.geometry import (Pose, cosine_distance, geodesic_angle, head_orientation,
                               project, rodrigues_to_matrix)
from dualpose.synth import SynthConfig, generate


def synthetic_observation(face_model, rvec=(0.1, -0.05, 0.02), tvec=(0.1, -0.05, 3.6),
                          size=256, label="real", oid="obs0"):
    pose = Pose(rodrigues_to_matrix(np.asarray(rvec, dtype=float)), np.asarray(tvec, dtype=float))
    cam = default_intrinsics(size, size)
    landmarks = project(face_model.points, pose, cam)
    obs = FaceObservation(id=oid, landmarks=landmarks, image_width=size,
                          image_height=size, label=label)
    return obs, pose


class TestDefaultIntrinsics:
    def test_paper_resolution(self):
        cam = default_intrinsics(294, 500)
        assert cam.fx == 294 and cam.fy == 294
        assert cam.cx == 147 and cam.cy == 250

    def test_square(self):
        cam = default_intrinsics(64, 64)
        assert (cam.fx, cam.fy, cam.cx, cam.cy) == (64, 64, 32, 32)

    def test_wide(self):
        cam = default_intrinsics(1920, 1080)
        assert (cam.fx, cam.fy, cam.cx, cam.cy) == (1920, 1920, 960, 540)

    def test_invalid(self):
        with pytest.raises(DataError):
            default_intrinsics(0, 10)


class TestEstimateDualPose:
    def test_consistent_face_recovers_pose_twice(self, face_model):
        obs, pose = synthetic_observation(face_model)
        dp = estimate_dual_pose(obs, face_model)
        for estimate in (dp.whole, dp.central):
            assert geodesic_angle(estimate.rotation, pose.rotation) < 1e-4
            assert np.linalg.norm(estimate.translation - pose.translation) < 1e-4
        assert dp.whole_rms < 1e-6 and dp.central_rms < 1e-6
        assert dp.id == obs.id and dp.label == obs.label

    def test_perturbed_central_region_increases_distance(self, face_model):
        cfg = SynthConfig(n_real=3, n_fake=3, frames_per_video=4, seed=21)
        observations = generate(cfg, face_model)
        by_id = {o.id: o for o in observations}
        checked = 0
        for obs in observations:
            if obs.label != "fake":
                continue
            twin = by_id[obs.id.replace("fake", "real")]
            d_fake = _orientation_distance(obs, face_model)
            d_real = _orientation_distance(twin, face_model)
            if d_fake is None or d_real is None:
                continue
            assert d_fake > d_real
            checked += 1
        assert checked >= 8

    def test_degenerate_landmarks_raise_region_tagged(self, face_model):
        obs = FaceObservation(id="deg", landmarks=np.full((68, 2), 40.0),
                              image_width=128, image_height=128)
        with pytest.raises(PoseEstimationError) as exc:
            estimate_dual_pose(obs, face_model)
        assert exc.value.region in ("whole", "central")


def _orientation_distance(obs, model):
    try:
        dp = estimate_dual_pose(obs, model)
    except PoseEstimationError:
        return None
    return cosine_distance(head_orientation(dp.whole.rotation),
                           head_orientation(dp.central.rotation))


class TestMakeFeature:
    def test_dimensions(self, face_model):
        obs, _ = synthetic_observation(face_model)
        dp = estimate_dual_pose(obs, face_model)
        dims = {FeatureVariant.ORIENT: 3, FeatureVariant.RVEC: 3, FeatureVariant.RMAT: 9,
                FeatureVariant.ORIENT_T: 6, FeatureVariant.RVEC_T: 6, FeatureVariant.RMAT_T: 12}
        for variant, dim in dims.items():
            f = make_feature(dp, variant)
            assert f.values.shape == (dim,)
            assert variant.dim == dim

    def test_identical_poses_give_zero(self, face_model):
        obs, pose = synthetic_observation(face_model)
        dp = estimate_dual_pose(obs, face_model)
        dp.central = dp.whole
        dp.central_rms = dp.whole_rms
        for variant in FeatureVariant:
            assert np.all(make_feature(dp, variant).values == 0.0)

    def test_consistent_face_near_null(self, face_model):
        # both landmark subsets are exact projections of one pose
        obs, _ = synthetic_observation(face_model)
        dp = estimate_dual_pose(obs, face_model)
        for variant in FeatureVariant:
            assert np.linalg.norm(make_feature(dp, variant).values) < 1e-3

    def test_rmat_t_matches_recomputation(self, face_model):
        obs, _ = synthetic_observation(face_model, rvec=(0.2, 0.1, -0.1))
        dp = estimate_dual_pose(obs, face_model)
        f = make_feature(dp, FeatureVariant.RMAT_T)
        expected = np.concatenate([
            (dp.whole.rotation - dp.central.rotation).reshape(-1),
            dp.whole.translation - dp.central.translation,
        ])
        np.testing.assert_array_equal(f.values, expected)

    def test_translation_variants_extend_base(self, face_model):
        # *_T variants differ from their base exactly in the appended block
        cfg = SynthConfig(n_real=2, n_fake=2, frames_per_video=3, seed=5)
        observations = generate(cfg, face_model)
        pairs = [(FeatureVariant.ORIENT, FeatureVariant.ORIENT_T),
                 (FeatureVariant.RVEC, FeatureVariant.RVEC_T),
                 (FeatureVariant.RMAT, FeatureVariant.RMAT_T)]
        for obs in observations[:4]:
            dp = estimate_dual_pose(obs, face_model)
            t_diff = dp.whole.translation - dp.central.translation
            for base, ext in pairs:
                fb = make_feature(dp, base).values
                fe = make_feature(dp, ext).values
                np.testing.assert_array_equal(fe[:base.dim], fb)
                np.testing.assert_array_equal(fe[base.dim:], t_diff)

    def test_metadata_carried(self, face_model):
        obs, _ = synthetic_observation(face_model, label="fake", oid="vid/f1")
        obs.video_id = "vid"
        dp = estimate_dual_pose(obs, face_model)
        f = make_feature(dp, FeatureVariant.RVEC)
        assert (f.id, f.video_id, f.label) == ("vid/f1", "vid", "fake")


class TestStandardization:
    def test_single_vector(self):
        f = FeatureVector(variant=FeatureVariant.ORIENT, values=[1.0, 2.0, 3.0])
        s = fit_standardization([f])
        np.testing.assert_array_equal(s.mean, [1.0, 2.0, 3.0])
        assert np.all(s.std == 1e-12)

    def test_two_vectors_hand_computed(self):
        fs = [FeatureVector(variant=FeatureVariant.ORIENT, values=v)
              for v in ([0.0, 0.0, 0.0], [2.0, 2.0, 2.0])]
        s = fit_standardization(fs)
        np.testing.assert_array_equal(s.mean, [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(s.std, [1.0, 1.0, 1.0])

    def test_standardized_sample_has_zero_mean_unit_std(self, rng):
        fs = [FeatureVector(variant=FeatureVariant.RVEC_T, values=rng.normal(size=6) * 5)
              for _ in range(40)]
        s = fit_standardization(fs)
        out = np.stack([apply_standardization(f, s).values for f in fs])
        np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(out.std(axis=0), 1.0, atol=1e-9)

    def test_refit_on_standardized_is_identity_stats(self, rng):
        fs = [FeatureVector(variant=FeatureVariant.ORIENT, values=rng.normal(size=3))
              for _ in range(25)]
        s = fit_standardization(fs)
        refit = fit_standardization([apply_standardization(f, s) for f in fs])
        np.testing.assert_allclose(refit.mean, 0.0, atol=1e-9)
        np.testing.assert_allclose(refit.std, 1.0, atol=1e-9)

    def test_mean_input_maps_to_zero(self, rng):
        fs = [FeatureVector(variant=FeatureVariant.ORIENT, values=rng.normal(size=3))
              for _ in range(9)]
        s = fit_standardization(fs)
        f = FeatureVector(variant=FeatureVariant.ORIENT, values=s.mean.copy())
        assert np.all(apply_standardization(f, s).values == 0.0)

    def test_roundtrip_inverse(self, rng):
        s = StandardizationStats(mean=rng.normal(size=6), std=rng.uniform(0.5, 2.0, 6))
        f = FeatureVector(variant=FeatureVariant.ORIENT_T, values=rng.normal(size=6))
        g = apply_standardization(f, s)
        back = g.values * s.std + s.mean
        np.testing.assert_allclose(back, f.values, atol=1e-12)

    def test_errors(self):
        with pytest.raises(DataError):
            fit_standardization([])
        mixed = [FeatureVector(variant=FeatureVariant.ORIENT, values=np.zeros(3)),
                 FeatureVector(variant=FeatureVariant.RVEC, values=np.zeros(3))]
        with pytest.raises(DataError):
            fit_standardization(mixed)
        s = StandardizationStats(mean=np.zeros(3), std=np.ones(3))
        with pytest.raises(DataError):
            apply_standardization(
                FeatureVector(variant=FeatureVariant.RMAT, values=np.zeros(9)), s)


class TestFaceObservation:
    def test_wrong_landmark_count(self):
        with pytest.raises(DataError):
            FaceObservation(id="x", landmarks=np.zeros((67, 2)),
                            image_width=10, image_height=10)

    def test_bad_label(self):
        with pytest.raises(DataError):
            FaceObservation(id="x", landmarks=np.zeros((68, 2)),
                            image_width=10, image_height=10, label="realish")
