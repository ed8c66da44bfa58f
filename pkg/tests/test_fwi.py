import numpy as np
import pytest

from svinv import fwi
from svinv import wavesim as ws
from svinv.errors import ParameterError


@pytest.fixture(scope="module")
def small_setup():
    """20x20 graded model, 3 sources, 500 steps."""
    nz = nx = 20
    true_grid = 1600.0 + 40.0 * np.arange(nz)[:, None] + np.zeros((1, nx))
    cfg = ws.SimConfig(dx=7.0, dt=0.001, n_t=500, pad=10, source_freq=15.0)
    geom = ws.AcquisitionGeometry(receiver_cols=tuple(range(0, 20, 2)),
                                  source_cols=(3, 10, 16), dx=7.0)
    wavelet = ws.ricker_for(cfg)
    prop = ws.Propagator(true_grid, geom, cfg)
    gathers, _ = prop.run(list(range(geom.n_sources)), wavelet)
    d_obs = ws.SeismicRecord(gathers)
    return true_grid, d_obs, geom, wavelet, cfg


class TestGaussianSmooth:
    def test_constant_unchanged(self):
        g = np.full((50, 50), 2500.0)
        assert np.allclose(fwi.gaussian_smooth(g, 5.0), g)

    def test_sigma_zero_identity(self):
        g = np.random.default_rng(0).uniform(1500, 4000, (30, 30))
        assert np.array_equal(fwi.gaussian_smooth(g, 0.0), g)

    def test_step_transition_width(self):
        # 10-90% width of a smoothed step is 2 * 1.2816 * sigma
        sigma = 5.0
        g = np.zeros((200, 1))
        g[100:] = 1.0
        sm = fwi.gaussian_smooth(g, sigma)[:, 0]
        lo = np.argmax(sm >= 0.1)
        hi = np.argmax(sm >= 0.9)
        expected = 2 * 1.2816 * sigma
        assert abs((hi - lo) - expected) <= 2.0

    def test_negative_sigma(self):
        with pytest.raises(ParameterError):
            fwi.gaussian_smooth(np.zeros((5, 5)), -1.0)


class TestLowpass:
    def test_dc_preserved(self):
        x = np.full((1000, 4), 3.7)
        y = fwi.lowpass(x, 10.0, 0.001)
        assert np.max(np.abs(y - x)) < 0.001 * 3.7

    def test_high_sine_attenuated(self):
        t = np.arange(1000) * 0.001
        x = np.sin(2 * np.pi * 40.0 * t)[:, None]
        y = fwi.lowpass(x, 10.0, 0.001)
        # >= 20 dB attenuation
        assert np.max(np.abs(y)) <= 0.1 * np.max(np.abs(x))

    def test_zero_phase_keeps_ricker_peak(self):
        w = ws.ricker(20.0, 0.001, 1000, t0=0.3)
        y = fwi.lowpass(w.samples, 15.0, 0.001)
        assert abs(int(np.argmax(y)) - 300) <= 1

    def test_cutoff_above_nyquist(self):
        with pytest.raises(ParameterError):
            fwi.lowpass(np.zeros((100, 2)), 600.0, 0.001)


class TestMisfit:
    def test_identity(self, small_setup):
        _, d_obs, *_ = small_setup
        assert fwi.misfit(d_obs, d_obs) == 0.0

    def test_constant_residual(self):
        a = np.zeros((2, 100, 5))
        b = a + 0.5
        assert abs(fwi.misfit(a, b) - 0.5 * a.size * 0.25) < 1e-12

    def test_symmetry(self, small_setup):
        _, d_obs, *_ = small_setup
        other = ws.SeismicRecord(d_obs.gathers + 1.0)
        assert fwi.misfit(d_obs, other) == fwi.misfit(other, d_obs)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            fwi.misfit(np.zeros((2, 3, 4)), np.zeros((2, 3, 5)))


class TestGradient:
    def test_zero_residual_zero_gradient(self, small_setup):
        true_grid, d_obs, geom, wavelet, cfg = small_setup
        g = fwi.gradient(true_grid, d_obs, geom, wavelet, cfg)
        assert np.all(g == 0.0)

    def test_matches_finite_differences(self, small_setup):
        true_grid, d_obs, geom, wavelet, cfg = small_setup
        test_grid = fwi.gaussian_smooth(true_grid, 2.0) + 30.0
        g, _ = fwi.gradient_and_misfit(test_grid, d_obs, geom, wavelet, cfg)

        def misfit_at(grid):
            prop = ws.Propagator(grid, geom, cfg)
            syn, _ = prop.run(list(range(geom.n_sources)), wavelet)
            return 0.5 * float(np.sum((syn - d_obs.gathers) ** 2))

        rng = np.random.default_rng(0)
        eps = 1.0
        for r, c in zip(rng.integers(0, 20, 8), rng.integers(0, 20, 8)):
            gp = test_grid.copy(); gp[r, c] += eps
            gm = test_grid.copy(); gm[r, c] -= eps
            fd = (misfit_at(gp) - misfit_at(gm)) / (2 * eps)
            assert abs(g[r, c] - fd) <= 1e-2 * abs(fd) + 1e-8

    def test_bandlimited_objective_matches_finite_differences(self, small_setup):
        # the stage objective the inversion descends: 0.5*||H syn - H obs||^2
        true_grid, d_obs, geom, wavelet, cfg = small_setup
        cutoff = 12.0
        obs_f = fwi.lowpass(d_obs.gathers, cutoff, cfg.dt)
        test_grid = fwi.gaussian_smooth(true_grid, 2.0) + 30.0
        g, _ = fwi.gradient_and_misfit(test_grid, obs_f, geom, wavelet, cfg, cutoff=cutoff)

        def j_at(grid):
            prop = ws.Propagator(grid, geom, cfg)
            syn, _ = prop.run(list(range(geom.n_sources)), wavelet)
            return 0.5 * float(np.sum((fwi.lowpass(syn, cutoff, cfg.dt) - obs_f) ** 2))

        rng = np.random.default_rng(1)
        eps = 1.0
        for r, c in zip(rng.integers(1, 20, 4), rng.integers(0, 20, 4)):
            gp = test_grid.copy(); gp[r, c] += eps
            gm = test_grid.copy(); gm[r, c] -= eps
            fd = (j_at(gp) - j_at(gm)) / (2 * eps)
            assert abs(g[r, c] - fd) <= 1e-2 * abs(fd) + 1e-8

    def test_residual_scaling_doubles_gradient(self, small_setup):
        true_grid, d_obs, geom, wavelet, cfg = small_setup
        test_grid = fwi.gaussian_smooth(true_grid, 2.0)
        prop = ws.Propagator(test_grid, geom, cfg)
        syn, _ = prop.run(list(range(geom.n_sources)), wavelet)
        # d_obs' = 2*d_obs - syn makes the residual exactly double
        doubled = ws.SeismicRecord(2.0 * d_obs.gathers - syn)
        g1 = fwi.gradient(test_grid, d_obs, geom, wavelet, cfg)
        g2 = fwi.gradient(test_grid, doubled, geom, wavelet, cfg)
        assert np.allclose(g2, 2.0 * g1, rtol=1e-12, atol=1e-300)


class TestInvert:
    def test_fixed_point(self, small_setup):
        true_grid, d_obs, geom, wavelet, cfg = small_setup
        model0 = _as_model(true_grid)
        fcfg = fwi.FwiConfig(cutoffs=(10.0, 20.0), total_iterations=2)
        result = fwi.invert(d_obs, model0, fcfg, cfg, geom, wavelet)
        assert result.fullband_final <= 1e-12
        assert np.max(np.abs(result.model.grid - true_grid)) < 1e-6

    def test_stage_schedule(self):
        assert fwi.split_iterations(50, 5) == [10] * 5
        assert fwi.split_iterations(7, 3) == [2, 2, 3]

    def test_desk_scale_small(self, small_setup):
        true_grid, d_obs, geom, wavelet, cfg = small_setup
        start = fwi.gaussian_smooth(true_grid, 3.0)
        fcfg = fwi.FwiConfig(cutoffs=(10.0, 15.0), total_iterations=8, step_initial=20.0)
        result = fwi.invert(d_obs, _as_model(start), fcfg, cfg, geom, wavelet)
        assert result.fullband_final < result.fullband_initial
        # stage misfits never increase
        for log in result.stage_log:
            assert log.end_misfit <= log.start_misfit + 1e-12
        hist = result.misfit_history
        boundaries = np.cumsum([s.iterations for s in result.stage_log])
        start_idx = 0
        for b in boundaries:
            seg = hist[start_idx:b]
            assert all(x >= y - 1e-12 for x, y in zip(seg, seg[1:]))
            start_idx = b
        lo, hi = fcfg.v_bounds
        assert np.all((result.model.grid >= lo) & (result.model.grid <= hi))

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            fwi.FwiConfig(cutoffs=(10.0, 10.0))
        with pytest.raises(ParameterError):
            fwi.FwiConfig(total_iterations=3)
        with pytest.raises(ParameterError):
            fwi.FwiConfig(v_bounds=(5000.0, 1000.0))


def _as_model(grid):
    from svinv.geomodel import VelocityModel
    return VelocityModel(np.array(grid, dtype=float), "layered", 4, seed=0)
