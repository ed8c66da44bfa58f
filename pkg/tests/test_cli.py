import json
from pathlib import Path

import numpy as np
import pytest

from svinv import dataio
from svinv.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def tiny_models(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "models"
    assert run("generate", "--layers", "4..4", "--per-subgroup", "1",
               "--seed", "7", "--out", out) == 0
    return out


@pytest.fixture(scope="module")
def tiny_records(tmp_path_factory, tiny_models):
    out = tmp_path_factory.mktemp("cli") / "records"
    assert run("simulate", "--models", tiny_models, "--out", out,
               "--nt", "300", "--freq", "20", "--precision", "32") == 0
    return out


class TestGenerate:
    def test_minimal_suite(self, tmp_path):
        out = tmp_path / "d"
        assert run("generate", "--per-subgroup", "1", "--seed", "7", "--out", out) == 0
        ds = dataio.read_dataset(out)
        assert len(ds) == 15
        assert (out / "config.json").exists()

    def test_deterministic_across_job_counts(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("generate", "--layers", "4..5", "--per-subgroup", "2", "--seed", "3",
                   "--out", a, "--jobs", "1") == 0
        assert run("generate", "--layers", "4..5", "--per-subgroup", "2", "--seed", "3",
                   "--out", b, "--jobs", "2") == 0
        assert (a / "models.f32").read_bytes() == (b / "models.f32").read_bytes()

    def test_rerun_with_echo_reproduces(self, tmp_path):
        a = tmp_path / "a"
        assert run("generate", "--layers", "4..4", "--per-subgroup", "2", "--seed", "11",
                   "--out", a) == 0
        echo = json.loads((a / "config.json").read_text())
        b = tmp_path / "b"
        echo["out"] = str(b)
        cfg_path = tmp_path / "rerun.json"
        cfg_path.write_text(json.dumps(echo))
        assert run("generate", "--config", cfg_path) == 0
        assert (a / "models.f32").read_bytes() == (b / "models.f32").read_bytes()

    def test_existing_output_rejected(self, tmp_path, tiny_models):
        assert run("generate", "--per-subgroup", "1", "--out", tiny_models) == 3


class TestSimulate:
    def test_record_shapes(self, tiny_records):
        ds = dataio.read_dataset(tiny_records)
        assert ds.manifest.record_shape == (20, 300, 34)
        assert ds.record(0).shape == (20, 300, 34)
        assert np.isfinite(ds.record(0)).all()
        assert (Path(tiny_records) / "config.json").exists()

    def test_stability_failure_exit_code(self, tiny_models, tmp_path, capsys):
        rc = run("simulate", "--models", tiny_models, "--out", tmp_path / "x",
                 "--dt", "0.004", "--nt", "100")
        assert rc == 3
        assert "stability" in capsys.readouterr().err

    def test_jobs_do_not_change_bytes(self, tiny_models, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("simulate", "--models", tiny_models, "--out", a, "--nt", "200", "--jobs", "1") == 0
        assert run("simulate", "--models", tiny_models, "--out", b, "--nt", "200", "--jobs", "2") == 0
        assert (a / "records.f32").read_bytes() == (b / "records.f32").read_bytes()


class TestNoiseAndSplit:
    def test_add_noise(self, tiny_records, tmp_path):
        out = tmp_path / "noisy"
        assert run("add-noise", "--in", tiny_records, "--out", out, "--seed", "5") == 0
        ds = dataio.read_dataset(out)
        assert ds.manifest.noise is True
        assert ds.manifest.noise_config["seed"] == 5
        clean = dataio.read_dataset(tiny_records)
        assert not np.array_equal(ds.record(0), clean.record(0))

    def test_split(self, tmp_path):
        models = tmp_path / "m"
        assert run("generate", "--per-subgroup", "4", "--seed", "2", "--out", models) == 0
        splits = tmp_path / "splits.json"
        assert run("split", "--dataset", models, "--test-per-subgroup", "2",
                   "--train-sizes", "1,2", "--seed", "9", "--out", splits) == 0
        s = dataio.load_split(splits)
        assert len(s.test) == 30
        assert len(s.train["TD-2"]) == 30
        assert (tmp_path / "splits.config.json").exists()


class TestEvaluateAndExport:
    def test_evaluate_self(self, tiny_models, tmp_path):
        report = tmp_path / "report.json"
        assert run("evaluate", "--pred", tiny_models, "--target", tiny_models,
                   "--report", report) == 0
        data = json.loads(report.read_text())
        assert data["overall"]["l1"] == 0.0
        assert abs(data["overall"]["ssim"] - 1.0) < 1e-12
        assert report.with_suffix(".csv").exists()
        assert report.with_suffix(".png").exists()

    def test_export_profile(self, tiny_models, tmp_path):
        out = tmp_path / "prof"
        assert run("export-profile", "--dataset", tiny_models, "--model", "0",
                   "--column", "50", "--out", out) == 0
        csv_path = out / "profile_model0_col50.csv"
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "depth_m,velocity_m_s"
        assert len(lines) == 101
        assert csv_path.with_suffix(".png").exists()

    def test_export_gather(self, tiny_records, tmp_path):
        out = tmp_path / "gather"
        assert run("export-gather", "--dataset", tiny_records, "--model", "1",
                   "--shot", "3", "--out", out) == 0
        csv_path = out / "gather_model1_shot3.csv"
        rows = csv_path.read_text().strip().splitlines()
        assert len(rows) == 300
        assert len(rows[0].split(",")) == 34
        assert csv_path.with_suffix(".png").exists()

    def test_gather_out_of_range(self, tiny_records, tmp_path):
        assert run("export-gather", "--dataset", tiny_records, "--model", "99",
                   "--out", tmp_path / "x") == 3


class TestUsage:
    def test_unknown_flag(self):
        assert run("generate", "--does-not-exist") == 2

    def test_unknown_command(self):
        assert run("frobnicate") == 2

    def test_missing_required(self, capsys):
        assert run("generate") == 3
        assert "error:validation" in capsys.readouterr().err
