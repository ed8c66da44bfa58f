import numpy as np
import pytest
import torch

from svinvnet.data import (
    BenchmarkDir,
    GatherDataset,
    denormalize_velocity,
    load_split,
    normalize_record,
    normalize_velocity,
    td_ids,
)
from conftest import write_tiny_dataset


class TestNormalization:
    def test_velocity_affine(self):
        assert normalize_velocity(np.array([1500.0]))[0] == 0.0
        assert normalize_velocity(np.array([4550.0]))[0] == 1.0
        assert abs(normalize_velocity(np.array([3025.0]))[0] - 0.5) < 1e-7

    def test_round_trip(self):
        v = np.random.default_rng(0).uniform(1500, 4550, (10, 10))
        back = denormalize_velocity(normalize_velocity(v))
        assert np.allclose(back, v, atol=1e-3)

    def test_record_unit_variance_normalization(self):
        rec = np.random.default_rng(1).normal(size=(2, 50, 4)) * 37.0
        out = normalize_record(rec)
        assert abs(out.std() - 1.0) < 1e-5
        # scale-free: amplitude scaling of the record does not change it
        assert np.allclose(normalize_record(rec * 250.0), out, atol=1e-5)

    def test_zero_record_untouched(self):
        out = normalize_record(np.zeros((2, 10, 3)))
        assert np.all(out == 0.0)


class TestBenchmarkDir:
    def test_reads_fields(self, tiny_dataset):
        bench = BenchmarkDir(tiny_dataset)
        assert len(bench) == 4
        assert bench.has_records
        assert bench.model(0).shape == (100, 100)
        assert bench.record(0).shape == (20, 1000, 34)
        assert bench.info(2).subgroup == "5-salt"

    def test_rejects_unknown_version(self, tmp_path):
        d = write_tiny_dataset(tmp_path / "ds", n=1)
        manifest = (d / "manifest.json").read_text().replace('"format_version": 1', '"format_version": 9')
        (d / "manifest.json").write_text(manifest)
        with pytest.raises(ValueError):
            BenchmarkDir(d)

    def test_dataset_items(self, tiny_dataset):
        bench = BenchmarkDir(tiny_dataset)
        ds = GatherDataset(bench, [0, 2])
        x, y = ds[0]
        assert x.shape == (20, 1000, 34) and x.dtype == torch.float32
        assert y.shape == (1, 100, 100)
        assert float(y.min()) >= 0.0 and float(y.max()) <= 1.0
        assert abs(float(x.std()) - 1.0) < 1e-3

    def test_missing_ids_rejected(self, tiny_dataset):
        bench = BenchmarkDir(tiny_dataset)
        with pytest.raises(ValueError):
            GatherDataset(bench, [0, 99])


class TestSplitFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "splits.json"
        path.write_text('{"test": [1, 2], "train": {"TD-1": [3], "TD-2": [3, 4]}}')
        s = load_split(path)
        assert td_ids(s, 1) == [3]
        assert td_ids(s, "TD-2") == [3, 4]

    def test_unknown_level(self, tmp_path):
        path = tmp_path / "splits.json"
        path.write_text('{"test": [], "train": {"TD-1": []}}')
        with pytest.raises(ValueError):
            td_ids(load_split(path), 7)
