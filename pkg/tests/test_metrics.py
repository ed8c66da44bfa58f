import numpy as np
import pytest

from svinv import geomodel as gm
from svinv import metrics as mx


@pytest.fixture(scope="module")
def model_pair():
    a = gm.build_layered_model(5, np.random.default_rng(1))
    b = gm.build_layered_model(5, np.random.default_rng(2))
    return a, b


class TestNormalize:
    def test_endpoints(self):
        f = mx.normalize_velocity(np.array([[1500.0, 4550.0]] * 11 + [[3025.0, 3025.0]] * 0))
        assert f.values[0, 0] == 0.0
        assert f.values[0, 1] == 1.0

    def test_midpoint(self):
        f = mx.normalize_velocity(np.full((4, 4), 3025.0))
        assert np.allclose(f.values, 0.5)

    def test_round_trip(self, model_pair):
        a, _ = model_pair
        back = mx.denormalize(mx.normalize_velocity(a))
        assert np.allclose(back, a.grid, atol=1e-9)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            mx.normalize_velocity(np.full((4, 4), 5000.0))


class TestL1L2:
    def test_identity(self, model_pair):
        a, _ = model_pair
        f = mx.normalize_velocity(a)
        assert mx.l1(f, f) == 0.0
        assert mx.l2(f, f) == 0.0

    def test_constant_offset(self):
        x = np.random.default_rng(0).uniform(0.0, 0.8, (50, 50))
        y = x + 0.1
        assert abs(mx.l1(x, y) - 0.1) < 1e-12
        assert abs(mx.l2(x, y) - 0.01) < 1e-12

    def test_symmetry(self, model_pair):
        a, b = model_pair
        fa, fb = mx.normalize_velocity(a), mx.normalize_velocity(b)
        assert mx.l1(fa, fb) == mx.l1(fb, fa)
        assert mx.l2(fa, fb) == mx.l2(fb, fa)

    def test_l2_below_l1_on_unit_interval(self, model_pair):
        a, b = model_pair
        fa, fb = mx.normalize_velocity(a), mx.normalize_velocity(b)
        assert mx.l2(fa, fb) <= mx.l1(fa, fb)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mx.l1(np.zeros((3, 3)), np.zeros((4, 4)))


class TestSsim:
    def test_identity(self, model_pair):
        a, _ = model_pair
        f = mx.normalize_velocity(a)
        assert abs(mx.ssim(f, f) - 1.0) < 1e-12

    def test_constant_images_closed_form(self):
        # luminance-only: (2*0.3*0.7 + C1) / (0.3^2 + 0.7^2 + C1)
        c1 = 0.01**2
        expected = (2 * 0.3 * 0.7 + c1) / (0.3**2 + 0.7**2 + c1)
        a = np.full((30, 30), 0.3)
        b = np.full((30, 30), 0.7)
        assert abs(mx.ssim(a, b) - expected) < 1e-6

    def test_symmetry(self, model_pair):
        a, b = model_pair
        fa, fb = mx.normalize_velocity(a), mx.normalize_velocity(b)
        assert abs(mx.ssim(fa, fb) - mx.ssim(fb, fa)) < 1e-12

    def test_range(self, model_pair):
        a, b = model_pair
        v = mx.ssim(mx.normalize_velocity(a), mx.normalize_velocity(b))
        assert -1.0 < v <= 1.0

    def test_too_small_field(self):
        with pytest.raises(ValueError):
            mx.ssim(np.zeros((8, 8)), np.zeros((8, 8)))


class TestMssim:
    def test_identity(self, model_pair):
        a, _ = model_pair
        f = mx.normalize_velocity(a)
        assert abs(mx.mssim(f, f) - 1.0) < 1e-12

    def test_small_input_rejected(self):
        with pytest.raises(ValueError):
            mx.mssim(np.zeros((8, 8)), np.zeros((8, 8)))

    def test_per_scale_product_oracle(self, model_pair):
        a, b = model_pair
        av = mx.normalize_velocity(a).values
        bv = mx.normalize_velocity(b).values
        # independently recompute the per-scale factors and multiply
        factors = []
        xa, xb = av, bv
        for lvl in range(4):
            if lvl < 3:
                factors.append(mx.contrast_structure(xa, xb))
                xa, xb = mx.downsample2(xa), mx.downsample2(xb)
            else:
                factors.append(mx.ssim(xa, xb))
        expected = 1.0
        for f, w in zip(factors, mx.MSSIM_WEIGHTS):
            expected *= max(f, 0.0) ** w
        assert abs(mx.mssim(av, bv) - expected) < 1e-12

    def test_scale_sizes(self):
        # 100 -> 50 -> 25 -> 12, all >= the 11x11 window
        sizes = [100]
        for _ in range(3):
            sizes.append(sizes[-1] // 2)
        assert sizes == [100, 50, 25, 12]
        assert all(s >= mx.SSIM_WINDOW for s in sizes)


class TestEvaluateBatch:
    def test_perfect_predictions(self):
        targets = gm.generate_model_suite(1, seed=3)
        report = mx.evaluate_batch(targets, targets)
        assert report.overall["l1"] == 0.0
        assert report.overall["l2"] == 0.0
        assert abs(report.overall["ssim"] - 1.0) < 1e-12
        assert abs(report.overall["mssim"] - 1.0) < 1e-12
        assert len(report.subgroups) == 15

    def test_single_pair_equals_pairwise(self, model_pair):
        a, b = model_pair
        report = mx.evaluate_batch([a], [b])
        fa, fb = mx.normalize_velocity(a), mx.normalize_velocity(b)
        assert abs(report.overall["l1"] - mx.l1(fa, fb)) < 1e-15
        assert abs(report.overall["ssim"] - mx.ssim(fa, fb)) < 1e-15

    def test_batch_mean_matches_brute_force(self):
        rng = np.random.default_rng(8)
        targets = [gm.build_layered_model(4, rng, seed=i) for i in range(4)]
        preds = [gm.build_layered_model(4, rng, seed=10 + i) for i in range(4)]
        report = mx.evaluate_batch(preds, targets)
        brute = np.mean([
            mx.l1(mx.normalize_velocity(p), mx.normalize_velocity(t))
            for p, t in zip(preds, targets)
        ])
        assert abs(report.overall["l1"] - brute) < 1e-15

    def test_id_mismatch(self, model_pair):
        a, b = model_pair
        a.sample_id, b.sample_id = 1, 2
        with pytest.raises(ValueError):
            mx.evaluate_batch([a], [b])
        a.sample_id = b.sample_id = None

    def test_length_mismatch(self, model_pair):
        a, b = model_pair
        with pytest.raises(ValueError):
            mx.evaluate_batch([a], [a, b])
