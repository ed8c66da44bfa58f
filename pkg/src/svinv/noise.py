"""Coherent (surface-wave-like) and stochastic noise for shot gathers.

Coherent noise is a set of spike events with linear moveout at an apparent
velocity drawn from [250, 450] m/s, loudest at the receiver nearest the
event origin and attenuating with time, convolved per trace with a Ricker
of random dominant frequency in [8, 17] Hz. Stochastic noise is zero-mean
white noise with randomly zeroed contiguous segments, convolved per trace
with a single-period tapered sine in [13, 17] Hz.

One noise realization is drawn per record; the mixing step rescales it per
shot gather so the noise peak is a drawn fraction of that gather's peak.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from .wavesim import AcquisitionGeometry, SeismicRecord, ricker


@dataclass(frozen=True)
class NoiseConfig:
    coherent_velocity_range: tuple[float, float] = (250.0, 450.0)
    coherent_f0_range: tuple[float, float] = (8.0, 17.0)
    stochastic_sine_range: tuple[float, float] = (13.0, 17.0)
    stochastic_zero_fraction_range: tuple[float, float] = (0.2, 0.6)
    mix_level_range: tuple[float, float] = (0.05, 0.20)
    coherent_events_range: tuple[int, int] = (1, 3)
    stochastic_sigma_range: tuple[float, float] = (0.5, 2.0)
    time_decay_s: float = 0.5
    seed: int = 0
    dt: float = 0.001
    n_t: int = 1000

    def __post_init__(self):
        for name in ("coherent_velocity_range", "coherent_f0_range", "stochastic_sine_range",
                     "stochastic_zero_fraction_range", "mix_level_range",
                     "coherent_events_range", "stochastic_sigma_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} must satisfy low <= high, got ({lo}, {hi})")
        lo, hi = self.mix_level_range
        if lo < 0.0 or hi >= 1.0:
            raise ValueError("mix levels must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {
            "coherent_velocity_range": list(self.coherent_velocity_range),
            "coherent_f0_range": list(self.coherent_f0_range),
            "stochastic_sine_range": list(self.stochastic_sine_range),
            "stochastic_zero_fraction_range": list(self.stochastic_zero_fraction_range),
            "mix_level_range": list(self.mix_level_range),
            "coherent_events_range": list(self.coherent_events_range),
            "stochastic_sigma_range": list(self.stochastic_sigma_range),
            "time_decay_s": self.time_decay_s,
            "seed": self.seed,
            "dt": self.dt,
            "n_t": self.n_t,
        }


def _ricker_kernel(f0: float, dt: float) -> np.ndarray:
    half = max(int(round(1.2 / (f0 * dt))), 1)
    n = 2 * half + 1
    return ricker(f0, dt, n, t0=half * dt).samples


def coherent_spikes(geom: AcquisitionGeometry, cfg: NoiseConfig,
                    rng: np.random.Generator) -> tuple[np.ndarray, list[dict]]:
    """Spike gather plus per-event metadata (origin, velocity, onset)."""
    n_rec = geom.n_receivers
    spikes = np.zeros((cfg.n_t, n_rec))
    n_events = int(rng.integers(cfg.coherent_events_range[0], cfg.coherent_events_range[1] + 1))
    origin = int(rng.choice(geom.source_cols))
    rec_x = np.asarray(geom.receiver_cols, dtype=float) * geom.dx
    events = []
    for _ in range(n_events):
        onset = float(rng.uniform(0.0, 0.25))
        v_app = float(rng.uniform(*cfg.coherent_velocity_range))
        base = float(rng.uniform(0.5, 1.0))
        offsets = np.abs(rec_x - origin * geom.dx)
        times = onset + offsets / v_app
        amps = base * np.exp(-times / cfg.time_decay_s)
        idx = np.rint(times / cfg.dt).astype(int)
        ok = idx < cfg.n_t
        spikes[idx[ok], np.arange(n_rec)[ok]] += amps[ok]
        events.append({"origin_col": origin, "onset": onset, "v_app": v_app, "base": base})
    return spikes, events


def coherent_noise(geom: AcquisitionGeometry, cfg: NoiseConfig,
                   rng: np.random.Generator) -> np.ndarray:
    """Surface-wave-like gather of shape (n_t, n_receivers)."""
    spikes, _ = coherent_spikes(geom, cfg, rng)
    f0 = float(rng.uniform(*cfg.coherent_f0_range))
    kernel = _ricker_kernel(f0, cfg.dt)
    return fftconvolve(spikes, kernel[:, None], mode="same", axes=0)


def _sine_kernel(freq: float, dt: float) -> np.ndarray:
    """One full sine period, cosine-tapered, unit peak."""
    n = max(int(round(1.0 / (freq * dt))), 3)
    t = np.arange(n) * dt
    k = np.sin(2.0 * np.pi * freq * t) * np.hanning(n)
    return k / np.max(np.abs(k))


def stochastic_noise(shape: tuple[int, int], cfg: NoiseConfig,
                     rng: np.random.Generator) -> np.ndarray:
    """Zero-mean white noise with zeroed segments, band-shaped by a sine.

    The drawn standard deviation only sets the raw amplitude; the mixing
    step rescales the gather against the signal peak, so its exact range is
    immaterial to the final noise level.
    """
    n_t, n_rec = shape
    sigma = float(rng.uniform(*cfg.stochastic_sigma_range))
    noise = rng.normal(0.0, sigma, size=shape)
    zf = float(rng.uniform(*cfg.stochastic_zero_fraction_range))
    if zf >= 1.0:
        return np.zeros(shape)
    for r in range(n_rec):
        zeroed = np.zeros(n_t, dtype=bool)
        target = int(zf * n_t)
        while zeroed.sum() < target:
            start = int(rng.integers(0, n_t))
            length = int(rng.integers(20, 100))
            zeroed[start:start + length] = True
        noise[zeroed, r] = 0.0
    freq = float(rng.uniform(*cfg.stochastic_sine_range))
    kernel = _sine_kernel(freq, cfg.dt)
    return fftconvolve(noise, kernel[:, None], mode="same", axes=0)


def add_noise(record: SeismicRecord, cfg: NoiseConfig, rng: np.random.Generator,
              geom: AcquisitionGeometry | None = None) -> SeismicRecord:
    """Mix one coherent and one stochastic realization into every gather.

    Per shot, each noise field is rescaled so its peak is a drawn fraction
    (mix_level_range) of that gather's peak. An all-zero gather falls back
    to a unit reference so the draw still applies. Pure function: the input
    record is left untouched.
    """
    gathers = np.asarray(record.gathers)
    if not np.isfinite(gathers).all():
        raise ValueError("record contains non-finite samples")
    n_src, n_t, n_rec = gathers.shape
    if geom is None:
        geom = AcquisitionGeometry(
            receiver_cols=tuple(range(0, 3 * n_rec, 3)),
            source_cols=tuple(range(2, 2 + 5 * n_src, 5)),
        )
    coh = coherent_noise(geom, cfg, rng)
    sto = stochastic_noise((n_t, n_rec), cfg, rng)
    coh_peak = float(np.max(np.abs(coh))) or 1.0
    sto_peak = float(np.max(np.abs(sto))) or 1.0
    out = np.array(gathers, dtype=float)
    for k in range(n_src):
        ref = float(np.max(np.abs(gathers[k]))) or 1.0
        lam_c = rng.uniform(*cfg.mix_level_range) * ref / coh_peak
        lam_s = rng.uniform(*cfg.mix_level_range) * ref / sto_peak
        out[k] = out[k] + lam_c * coh + lam_s * sto
    return replace(record, gathers=out)
