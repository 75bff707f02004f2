import json
from pathlib import Path

import numpy as np
import pytest

from dualpose import cli, formats
from dualpose.exceptions import SchemaError
from dualpose.features import FeatureVariant
from dualpose.synth import SynthConfig, generate


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory, face_model):
    """A small on-disk dataset written through the CLI synth command."""
    out = tmp_path_factory.mktemp("ds")
    cfg = {
        "feature_variant": "rvec-t",
        "folds": 3,
        "seed": 7,
        "svm_grid": {"c": [1, 10], "gamma": [0.1, 1]},
        "synth": {"n_real": 8, "n_fake": 8, "frames_per_video": 6, "seed": 7},
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = cli.main(["synth", "--config", str(cfg_path), "--out", str(out / "data")])
    assert rc == 0
    return out, cfg_path


class TestObservationRoundtrip:
    def test_write_read_lossless(self, tmp_path, face_model):
        observations = generate(SynthConfig(n_real=2, n_fake=2, frames_per_video=3,
                                            seed=1), face_model)
        path = tmp_path / "obs.jsonl"
        formats.write_observations(path, observations)
        back, errors = formats.read_observations(path)
        assert not errors
        assert len(back) == len(observations)
        for a, b in zip(observations, back):
            assert a.id == b.id and a.label == b.label and a.video_id == b.video_id
            np.testing.assert_array_equal(a.landmarks, b.landmarks)

    def test_bad_records_collected_not_fatal(self, tmp_path):
        good = {"id": "ok", "video_id": None, "label": "real", "width": 10, "height": 10,
                "landmarks": [[1.0, 2.0]] * 68}
        bad_count = dict(good, id="short", landmarks=[[1.0, 2.0]] * 67)
        path = tmp_path / "mixed.jsonl"
        path.write_text("\n".join([json.dumps(good), json.dumps(bad_count), "{not json"]))
        out, errors = formats.read_observations(path)
        assert len(out) == 1 and out[0].id == "ok"
        assert len(errors) == 2
        assert any(e.record_id == "short" for e in errors)

    def test_schema_error_names_field(self):
        rec = {"id": "x", "label": "real", "width": -3, "height": 5,
               "landmarks": [[0.0, 0.0]] * 68}
        with pytest.raises(SchemaError) as exc:
            formats.record_to_observation(rec)
        assert exc.value.field == "width"


class TestManifest:
    def test_split_hygiene_enforced(self, tmp_path, face_model):
        observations = generate(SynthConfig(n_real=1, n_fake=1, frames_per_video=2,
                                            seed=1), face_model)
        f = tmp_path / "v.jsonl"
        formats.write_observations(f, observations[:2])
        doc = {"entries": [
            {"landmark_file": "v.jsonl", "label": "real", "split": "train", "video_id": "v"},
            {"landmark_file": "v.jsonl", "label": "real", "split": "test", "video_id": "v"},
        ]}
        mpath = tmp_path / "manifest.json"
        mpath.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            formats.load_manifest(mpath)

    def test_missing_file_rejected(self, tmp_path):
        doc = {"entries": [{"landmark_file": "absent.jsonl", "label": "real",
                            "split": "train"}]}
        mpath = tmp_path / "manifest.json"
        mpath.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            formats.load_manifest(mpath)

    def test_entry_label_is_authoritative(self, tmp_path, face_model):
        observations = generate(SynthConfig(n_real=1, n_fake=1, frames_per_video=2,
                                            seed=1), face_model)
        real = [o for o in observations if o.label == "real"]
        f = tmp_path / "v.jsonl"
        formats.write_observations(f, real)
        doc = {"entries": [{"landmark_file": "v.jsonl", "label": "fake",
                            "split": "train", "video_id": "v"}]}
        mpath = tmp_path / "manifest.json"
        mpath.write_text(json.dumps(doc))
        manifest = formats.load_manifest(mpath)
        out, errors = formats.load_split_observations(manifest, "train")
        # conflicting labels are rejected per record
        assert not out and len(errors) == len(real)


class TestRunConfig:
    def test_defaults(self):
        cfg = formats.RunConfig()
        assert cfg.feature_variant is FeatureVariant.RMAT_T
        assert cfg.folds == 5
        assert len(cfg.grid()) == 25

    def test_load_and_overrides(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"feature_variant": "orient", "folds": 3,
                                 "svm_grid": {"c": [5], "gamma": [0.5]},
                                 "synth": {"n_real": 3, "n_fake": 3}}))
        cfg = formats.load_run_config(p)
        assert cfg.feature_variant is FeatureVariant.ORIENT
        assert cfg.folds == 3
        assert len(cfg.grid()) == 1
        assert cfg.synth.n_real == 3

    def test_unknown_keys_rejected(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"fold_count": 3}))
        with pytest.raises(SchemaError):
            formats.load_run_config(p)


class TestCliPipeline:
    def test_synth_writes_expected_manifest(self, small_dataset):
        out, _ = small_dataset
        manifest = formats.load_manifest(out / "data" / "manifest.json")
        assert len(manifest.entries) == 16
        train = manifest.split_entries("train")
        test = manifest.split_entries("test")
        # 8 videos per class at train_fraction 5/7 -> 6 train / 2 test each
        assert len(train) == 12 and len(test) == 4
        labels = {e.label for e in train}
        assert labels == {"real", "fake"}

    def test_synth_is_deterministic_bytes(self, tmp_path, small_dataset):
        out, cfg_path = small_dataset
        rc = cli.main(["synth", "--config", str(cfg_path), "--out", str(tmp_path / "again")])
        assert rc == 0
        for f in sorted((out / "data").glob("*.jsonl")):
            assert (tmp_path / "again" / f.name).read_bytes() == f.read_bytes()

    def test_pose_command(self, tmp_path, face_model):
        # exact projections: both regions agree to numerical precision
        observations = generate(SynthConfig(n_real=2, n_fake=1, frames_per_video=3,
                                            landmark_jitter_px=0, shift_mean_px=0,
                                            shift_std_px=0, seed=2), face_model)
        src = tmp_path / "consistent.jsonl"
        formats.write_observations(src, [o for o in observations if o.label == "real"])
        dst = tmp_path / "poses.jsonl"
        rc = cli.main(["pose", "--in", str(src), "--out", str(dst)])
        assert rc == 0
        rows = [json.loads(line) for line in dst.read_text().splitlines()]
        assert len(rows) == 6
        for row in rows:
            assert set(row) >= {"id", "whole", "central", "cosine_distance"}
            assert row["cosine_distance"] < 1e-3

    def test_pose_rejects_bad_record_and_counts(self, tmp_path, capsys):
        good = {"id": "ok", "video_id": None, "label": "real", "width": 256, "height": 256,
                "landmarks": None}
        # build one valid record from synth output and one broken one
        from dualpose.face_model import default_model
        observations = generate(SynthConfig(n_real=1, n_fake=1, frames_per_video=1,
                                            seed=1), default_model())
        rec = formats.observation_to_record(observations[0])
        broken = dict(rec, id="bad", landmarks=rec["landmarks"][:67])
        src = tmp_path / "in.jsonl"
        src.write_text(json.dumps(rec) + "\n" + json.dumps(broken) + "\n")
        dst = tmp_path / "out.jsonl"
        rc = cli.main(["pose", "--in", str(src), "--out", str(dst)])
        assert rc == 0
        assert len(dst.read_text().splitlines()) == 1
        err = capsys.readouterr().err
        assert "bad" in err

    def test_features_command(self, small_dataset, tmp_path):
        out, _ = small_dataset
        src = out / "data" / "fake000.jsonl"
        dst = tmp_path / "feats.jsonl"
        rc = cli.main(["features", "--in", str(src), "--variant", "rmat-t",
                       "--out", str(dst)])
        assert rc == 0
        rows = [json.loads(line) for line in dst.read_text().splitlines()]
        assert all(len(r["values"]) == 12 for r in rows)

    def test_train_eval_report_cycle(self, small_dataset, tmp_path, capsys):
        out, cfg_path = small_dataset
        manifest = str(out / "data" / "manifest.json")
        model_path = tmp_path / "model.json"
        rc = cli.main(["train", "--manifest", manifest, "--config", str(cfg_path),
                       "--out", str(model_path)])
        assert rc == 0
        train_out = capsys.readouterr().out
        assert "CV AUROC" in train_out

        report_path = tmp_path / "report.json"
        roc_path = tmp_path / "roc.csv"
        rc = cli.main(["eval", "--manifest", manifest, "--model", str(model_path),
                       "--config", str(cfg_path), "--out", str(report_path),
                       "--roc-csv", str(roc_path)])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert 0.0 <= report["auroc_frame"] <= 1.0
        assert report["auroc_video"] is not None
        assert report["roc_points"][0] == [0.0, 0.0]
        assert report["roc_points"][-1] == [1.0, 1.0]
        assert set(report["histogram"]["counts"]) == {"real", "fake"}
        assert roc_path.read_text().startswith("fpr,tpr")

        rc = cli.main(["report", "--in", str(report_path)])
        assert rc == 0
        assert "frame AUROC" in capsys.readouterr().out

    def test_train_warns_on_uninformative_features(self, tmp_path, capsys):
        cfg = {"feature_variant": "orient", "folds": 2, "seed": 3,
               "svm_grid": {"c": [10], "gamma": [0.1]},
               "synth": {"n_real": 5, "n_fake": 5, "frames_per_video": 4,
                         "shift_mean_px": 0.0, "shift_std_px": 0.0, "seed": 3}}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert cli.main(["synth", "--config", str(cfg_path),
                         "--out", str(tmp_path / "d")]) == 0
        rc = cli.main(["train", "--manifest", str(tmp_path / "d" / "manifest.json"),
                       "--config", str(cfg_path), "--out", str(tmp_path / "m.json")])
        assert rc == 0
        captured = capsys.readouterr()
        assert "near chance" in captured.err

    def test_train_determinism_same_seed(self, small_dataset, tmp_path, capsys):
        out, cfg_path = small_dataset
        manifest = str(out / "data" / "manifest.json")
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        assert cli.main(["train", "--manifest", manifest, "--config", str(cfg_path),
                         "--out", str(p1)]) == 0
        assert cli.main(["train", "--manifest", manifest, "--config", str(cfg_path),
                         "--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()


class TestCliExitCodes:
    def test_usage_error_is_1(self):
        assert cli.main(["pose", "--out", "x.jsonl"]) == 1
        assert cli.main(["no-such-command"]) == 1

    def test_data_error_is_2(self, tmp_path):
        missing = str(tmp_path / "none.jsonl")
        assert cli.main(["pose", "--in", missing, "--out", str(tmp_path / "o")]) == 2

    def test_eval_without_model_is_2(self, small_dataset, tmp_path):
        out, _ = small_dataset
        manifest = str(out / "data" / "manifest.json")
        rc = cli.main(["eval", "--manifest", manifest,
                       "--model", str(tmp_path / "missing.json"),
                       "--out", str(tmp_path / "r.json")])
        assert rc == 2

    def test_all_records_bad_is_2(self, tmp_path):
        src = tmp_path / "bad.jsonl"
        src.write_text('{"id": "x"}\n')
        rc = cli.main(["pose", "--in", str(src), "--out", str(tmp_path / "o.jsonl")])
        assert rc == 2
