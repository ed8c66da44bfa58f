"""Constant-density 2D acoustic finite-difference forward modeling.

Solves p_tt = v^2 (p_xx + p_zz) + v^2 * s with second-order time stepping
and a selectable order-2 or order-4 spatial stencil on a grid padded by
``pad`` edge-replicated cells on the left, right and bottom. The top row is
a free surface (pressure pinned to zero); the other three padded edges carry
the first-order one-way (paraxial A1) absorbing condition, with the two
bottom corners averaging the adjacent edge updates.

Sources and receivers nominally sit on the surface row; because pressure is
identically zero there they are placed one row below it. Source injection is
additive, scaled by dt^2 * v^2 at the source cell.

The propagator steps a single shot, a batch of shots (leading axis), and can
retain the full wavefield history for adjoint-state gradients. Batched and
single-shot runs apply identical elementwise operations, so their traces are
bit-for-bit equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ParameterError, SimulationDivergedError
from .geomodel import VelocityModel

DIVERGENCE_FACTOR = 1.0e6


# ---------------------------------------------------------------------------
# Configuration and geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    dx: float = 7.0
    dt: float = 0.001
    n_t: int = 1000
    pad: int = 20
    stencil_space_order: int = 2
    source_freq: float = 20.0
    t0: float | None = None          # Ricker peak delay; defaults to 1.5 / f0
    dtype: np.dtype = np.float64

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0 or self.n_t < 1 or self.pad < 0:
            raise ConfigurationError("dx, dt must be positive; n_t >= 1; pad >= 0")
        if self.stencil_space_order not in (2, 4):
            raise ConfigurationError("spatial stencil order must be 2 or 4")
        if self.source_freq <= 0:
            raise ConfigurationError("source frequency must be positive")

    @property
    def dz(self) -> float:
        return self.dx

    @property
    def peak_delay(self) -> float:
        return self.t0 if self.t0 is not None else 1.5 / self.source_freq


@dataclass(frozen=True)
class AcquisitionGeometry:
    receiver_cols: tuple[int, ...]
    source_cols: tuple[int, ...]
    source_row: int = 0
    receiver_row: int = 0
    dx: float = 7.0

    @property
    def n_receivers(self) -> int:
        return len(self.receiver_cols)

    @property
    def n_sources(self) -> int:
        return len(self.source_cols)

    @property
    def receiver_spacing_m(self) -> float:
        return (self.receiver_cols[1] - self.receiver_cols[0]) * self.dx

    @property
    def source_spacing_m(self) -> float:
        return (self.source_cols[1] - self.source_cols[0]) * self.dx


def default_geometry(dx: float = 7.0) -> AcquisitionGeometry:
    """34 receivers every 3 cells from column 0 (both lateral endpoints
    covered) and 20 sources every 5 cells starting from column 2."""
    return AcquisitionGeometry(
        receiver_cols=tuple(range(0, 100, 3)),
        source_cols=tuple(range(2, 98, 5)),
        source_row=0,
        receiver_row=0,
        dx=dx,
    )


@dataclass(frozen=True)
class SourceWavelet:
    samples: np.ndarray
    f0: float
    t0: float

    def scaled(self, factor: float) -> "SourceWavelet":
        return SourceWavelet(self.samples * factor, self.f0, self.t0)


def ricker(f0: float, dt: float, n_t: int, t0: float) -> SourceWavelet:
    """Ricker wavelet (1 - 2 pi^2 f0^2 tau^2) exp(-pi^2 f0^2 tau^2)."""
    if f0 <= 0:
        raise ParameterError("dominant frequency must be positive")
    if t0 < 0:
        raise ParameterError("peak delay must be non-negative")
    tau = np.arange(n_t) * dt - t0
    a = (math.pi * f0) ** 2
    samples = (1.0 - 2.0 * a * tau**2) * np.exp(-a * tau**2)
    return SourceWavelet(samples, f0, t0)


def ricker_for(cfg: SimConfig) -> SourceWavelet:
    return ricker(cfg.source_freq, cfg.dt, cfg.n_t, cfg.peak_delay)


# ---------------------------------------------------------------------------
# Pre-checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float

    def __str__(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return f"{self.name}: {self.value:.4f} vs limit {self.limit:.4f} -> {verdict}"


def stability_check(cfg: SimConfig, v_max: float) -> CheckResult:
    """Courant condition v_max * dt * sqrt(1/dx^2 + 1/dz^2) <= C_max."""
    courant = v_max * cfg.dt * math.sqrt(1.0 / cfg.dx**2 + 1.0 / cfg.dz**2)
    limit = 1.0 if cfg.stencil_space_order == 2 else math.sqrt(3.0) / 2.0
    return CheckResult("stability", courant <= limit, courant, limit)


def dispersion_check(cfg: SimConfig, v_min: float) -> CheckResult:
    """Points per dominant wavelength v_min / (f0 * dx) >= 10."""
    ppw = v_min / (cfg.source_freq * cfg.dx)
    return CheckResult("dispersion", ppw >= 10.0, ppw, 10.0)


def pad_model(model, pad: int) -> np.ndarray:
    """Edge-replicate ``pad`` cells on the left, right and bottom; the top
    edge stays unpadded (free surface)."""
    grid = model.grid if isinstance(model, VelocityModel) else np.asarray(model)
    if pad < 0:
        raise ParameterError("pad must be non-negative")
    if pad == 0:
        return np.array(grid)
    return np.pad(grid, ((0, pad), (pad, pad)), mode="edge")


def pad_transpose(g_padded: np.ndarray, pad: int, model_shape: tuple[int, int]) -> np.ndarray:
    """Adjoint of pad_model: fold pad-cell contributions back onto the
    replicated edge cells of the model."""
    nz, nx = model_shape
    if pad == 0:
        return np.array(g_padded)
    tmp = np.array(g_padded[:, pad:pad + nx])
    tmp[:, 0] += g_padded[:, :pad].sum(axis=1)
    tmp[:, -1] += g_padded[:, pad + nx:].sum(axis=1)
    out = tmp[:nz]
    out[-1] += tmp[nz:].sum(axis=0)
    return out


# ---------------------------------------------------------------------------
# Gathers
# ---------------------------------------------------------------------------

@dataclass
class ShotGather:
    traces: np.ndarray           # (n_t, n_receivers)
    source_index: int


@dataclass
class SeismicRecord:
    gathers: np.ndarray          # (n_sources, n_t, n_receivers)
    model_ref: int | str | None = None


# ---------------------------------------------------------------------------
# Propagator
# ---------------------------------------------------------------------------

def _effective_row(row: int) -> int:
    # free surface is pinned to zero, so surface devices sit one row below
    return max(row, 1)


class Propagator:
    """Precomputed stepping machinery for one velocity model.

    Attributes used by the adjoint code in :mod:`svinv.fwi`: ``vp`` (the
    padded velocity), ``v2dt2``, the edge coefficient vectors ``kl``,
    ``kr``, ``kb`` and corner scalars ``kbl``, ``kbr``.
    """

    def __init__(self, model, geom: AcquisitionGeometry, cfg: SimConfig, check: bool = True):
        grid = model.grid if isinstance(model, VelocityModel) else np.asarray(model)
        self.cfg = cfg
        self.geom = geom
        self.model_shape = grid.shape
        if check:
            for res in (stability_check(cfg, float(grid.max())),
                        dispersion_check(cfg, float(grid.min()))):
                if not res.passed:
                    raise ConfigurationError(f"pre-check failed: {res}")
        dtype = cfg.dtype
        self.vp = pad_model(grid, cfg.pad).astype(dtype)
        self.nz, self.nx = self.vp.shape
        self.v2dt2 = (self.vp * dtype(cfg.dt)) ** 2
        self.inv_dx2 = dtype(1.0 / cfg.dx**2)
        k = self.vp * dtype(cfg.dt / cfg.dx)
        self.kl = k[1:-1, 0]
        self.kr = k[1:-1, -1]
        self.kb = k[-1, 1:-1]
        self.kbl = k[-1, 0]
        self.kbr = k[-1, -1]
        self.src_row = _effective_row(geom.source_row)
        self.rec_row = _effective_row(geom.receiver_row)
        self.rec_cols = np.asarray(geom.receiver_cols, dtype=int) + cfg.pad
        if self.src_row >= self.nz - 1 or self.rec_row >= self.nz - 1:
            raise ConfigurationError("source/receiver rows must land in the interior")

    # -- spatial operator ---------------------------------------------------

    def lap(self, p: np.ndarray) -> np.ndarray:
        """Discrete Laplacian, zero outside the interior."""
        lap = np.zeros_like(p)
        c = self.inv_dx2
        lap[..., 1:-1, 1:-1] = (
            p[..., 1:-1, 2:] + p[..., 1:-1, :-2] + p[..., 2:, 1:-1] + p[..., :-2, 1:-1]
            - 4.0 * p[..., 1:-1, 1:-1]
        ) * c
        if self.cfg.stencil_space_order == 4:
            lap[..., 2:-2, 2:-2] = (
                -p[..., 2:-2, 4:] + 16.0 * p[..., 2:-2, 3:-1] - 30.0 * p[..., 2:-2, 2:-2]
                + 16.0 * p[..., 2:-2, 1:-3] - p[..., 2:-2, :-4]
                - p[..., 4:, 2:-2] + 16.0 * p[..., 3:-1, 2:-2] - 30.0 * p[..., 2:-2, 2:-2]
                + 16.0 * p[..., 1:-3, 2:-2] - p[..., :-4, 2:-2]
            ) * (c / 12.0)
        return lap

    def lap_transpose(self, w: np.ndarray) -> np.ndarray:
        """Transpose of :meth:`lap` (stencils are symmetric, zones are not).

        Expects ``w`` supported on the interior and evaluates contributions
        on the full grid, including the edge ring.
        """
        out = np.zeros_like(w)
        c = self.inv_dx2
        if self.cfg.stencil_space_order == 2:
            wi = w[..., 1:-1, 1:-1] * c
            out[..., 1:-1, 2:] += wi
            out[..., 1:-1, :-2] += wi
            out[..., 2:, 1:-1] += wi
            out[..., :-2, 1:-1] += wi
            out[..., 1:-1, 1:-1] += -4.0 * wi
            return out
        # order 4: ring cells carry the order-2 stencil, the deep interior
        # the order-4 one; scatter each zone separately.
        ring = np.zeros_like(w)
        ring[..., 1:-1, 1:-1] = w[..., 1:-1, 1:-1]
        ring[..., 2:-2, 2:-2] = 0.0
        ri = ring * c
        out[..., :, :] += np.roll(ri, 1, axis=-1) + np.roll(ri, -1, axis=-1)
        out[..., :, :] += np.roll(ri, 1, axis=-2) + np.roll(ri, -1, axis=-2)
        out -= 4.0 * ri
        wd = np.zeros_like(w)
        wd[..., 2:-2, 2:-2] = w[..., 2:-2, 2:-2] * (c / 12.0)
        for axis in (-1, -2):
            out += -np.roll(wd, 2, axis=axis) + 16.0 * np.roll(wd, 1, axis=axis)
            out += -np.roll(wd, -2, axis=axis) + 16.0 * np.roll(wd, -1, axis=axis)
        out += -60.0 * wd
        return out

    # -- time stepping ------------------------------------------------------

    def step(self, p_prev, p_cur, src_cols, src_amp):
        """One time step; ``src_cols`` is an int array (one column per batch
        element, padded coordinates) and ``src_amp`` the matching amplitudes."""
        p_new = 2.0 * p_cur - p_prev + self.v2dt2 * self.lap(p_cur)
        if p_new.ndim == 3:
            b = np.arange(p_new.shape[0])
            p_new[b, self.src_row, src_cols] += self.v2dt2[self.src_row, src_cols] * src_amp
        else:
            p_new[self.src_row, src_cols] += self.v2dt2[self.src_row, src_cols] * src_amp
        pc = p_cur
        p_new[..., 1:-1, 0] = pc[..., 1:-1, 0] + self.kl * (pc[..., 1:-1, 1] - pc[..., 1:-1, 0])
        p_new[..., 1:-1, -1] = pc[..., 1:-1, -1] - self.kr * (pc[..., 1:-1, -1] - pc[..., 1:-1, -2])
        p_new[..., -1, 1:-1] = pc[..., -1, 1:-1] - self.kb * (pc[..., -1, 1:-1] - pc[..., -2, 1:-1])
        p_new[..., -1, 0] = pc[..., -1, 0] + 0.5 * self.kbl * (
            (pc[..., -1, 1] - pc[..., -1, 0]) - (pc[..., -1, 0] - pc[..., -2, 0])
        )
        p_new[..., -1, -1] = pc[..., -1, -1] - 0.5 * self.kbr * (
            (pc[..., -1, -1] - pc[..., -1, -2]) + (pc[..., -1, -1] - pc[..., -2, -1])
        )
        p_new[..., 0, :] = 0.0
        return p_new

    # -- adjoint building blocks ---------------------------------------------
    #
    # One forward step writes every output cell exactly once:
    #   interior:  u+ = 2u - u_prev + dt^2 v^2 lap(u) (+ source)
    #   edges:     u+ = (1-k) u + k u_inward            (one-way condition)
    #   corners:   the average of the two adjacent edge formulas
    #   top row:   0
    # The transposes below are the exact adjoints of those assignments, so a
    # backward recursion built on them reproduces finite differences of the
    # discrete misfit to rounding accuracy.

    def step_transpose(self, mu: np.ndarray) -> np.ndarray:
        """Transpose of one step's Jacobian with respect to its current state."""
        out = np.zeros_like(mu)
        wm = np.zeros_like(mu)
        wm[1:-1, 1:-1] = self.v2dt2[1:-1, 1:-1] * mu[1:-1, 1:-1]
        out += self.lap_transpose(wm)
        out[1:-1, 1:-1] += 2.0 * mu[1:-1, 1:-1]
        ml = mu[1:-1, 0]
        out[1:-1, 0] += (1.0 - self.kl) * ml
        out[1:-1, 1] += self.kl * ml
        mr = mu[1:-1, -1]
        out[1:-1, -1] += (1.0 - self.kr) * mr
        out[1:-1, -2] += self.kr * mr
        mb = mu[-1, 1:-1]
        out[-1, 1:-1] += (1.0 - self.kb) * mb
        out[-2, 1:-1] += self.kb * mb
        mbl = mu[-1, 0]
        out[-1, 0] += (1.0 - self.kbl) * mbl
        out[-1, 1] += 0.5 * self.kbl * mbl
        out[-2, 0] += 0.5 * self.kbl * mbl
        mbr = mu[-1, -1]
        out[-1, -1] += (1.0 - self.kbr) * mbr
        out[-1, -2] += 0.5 * self.kbr * mbr
        out[-2, -1] += 0.5 * self.kbr * mbr
        return out

    def grad_v_step(self, g: np.ndarray, mu: np.ndarray, un: np.ndarray,
                    w_n: float, src_col: int) -> None:
        """Accumulate d(step)/d(v_padded)^T mu for the step that consumed
        state ``un`` and source sample ``w_n``."""
        cfg = self.cfg
        fac = 2.0 * cfg.dt * cfg.dt
        lap_un = self.lap(un)
        g[1:-1, 1:-1] += mu[1:-1, 1:-1] * (fac * self.vp[1:-1, 1:-1]) * lap_un[1:-1, 1:-1]
        sr = self.src_row
        g[sr, src_col] += mu[sr, src_col] * fac * self.vp[sr, src_col] * w_n
        dtdx = cfg.dt / cfg.dx
        g[1:-1, 0] += mu[1:-1, 0] * dtdx * (un[1:-1, 1] - un[1:-1, 0])
        g[1:-1, -1] += mu[1:-1, -1] * dtdx * (un[1:-1, -2] - un[1:-1, -1])
        g[-1, 1:-1] += mu[-1, 1:-1] * dtdx * (un[-2, 1:-1] - un[-1, 1:-1])
        g[-1, 0] += mu[-1, 0] * dtdx * 0.5 * ((un[-1, 1] - un[-1, 0]) - (un[-1, 0] - un[-2, 0]))
        g[-1, -1] += mu[-1, -1] * dtdx * 0.5 * (-(un[-1, -1] - un[-1, -2]) - (un[-1, -1] - un[-2, -1]))

    def run(self, source_indices: Sequence[int], wavelet: SourceWavelet,
            keep_wavefield: bool = False):
        """Propagate the given shots; returns (gathers, wavefields or None).

        ``gathers`` has shape (n_shots, n_t, n_receivers); the wavefield
        history, when kept, has shape (n_shots, n_t, nz, nx) and holds the
        state at recording time (before each step).
        """
        cfg = self.cfg
        n_shots = len(source_indices)
        src_cols = np.array([self.geom.source_cols[i] for i in source_indices], dtype=int) + cfg.pad
        w = np.asarray(wavelet.samples, dtype=cfg.dtype)
        if len(w) < cfg.n_t:
            raise ConfigurationError("wavelet shorter than the simulation")
        threshold = DIVERGENCE_FACTOR * float(np.max(np.abs(w)))
        batched = n_shots > 1
        shape = (n_shots, self.nz, self.nx) if batched else (self.nz, self.nx)
        p_prev = np.zeros(shape, dtype=cfg.dtype)
        p_cur = np.zeros(shape, dtype=cfg.dtype)
        gathers = np.zeros((n_shots, cfg.n_t, len(self.rec_cols)), dtype=cfg.dtype)
        fields = np.zeros((n_shots, cfg.n_t, self.nz, self.nx), dtype=cfg.dtype) if keep_wavefield else None
        cols = src_cols if batched else int(src_cols[0])
        for n in range(cfg.n_t):
            if batched:
                gathers[:, n, :] = p_cur[:, self.rec_row, self.rec_cols]
            else:
                gathers[0, n, :] = p_cur[self.rec_row, self.rec_cols]
            if keep_wavefield:
                fields[:, n] = p_cur
            p_new = self.step(p_prev, p_cur, cols, w[n])
            p_prev, p_cur = p_cur, p_new
            if (n % 50 == 49 or n == cfg.n_t - 1) and threshold > 0:
                peak = float(np.max(np.abs(p_cur)))
                if not math.isfinite(peak) or peak > threshold:
                    raise SimulationDivergedError(
                        f"wavefield reached {peak:.3e} (> {threshold:.3e}) at step {n}"
                    )
        return gathers, fields


# ---------------------------------------------------------------------------
# Public simulation entry points
# ---------------------------------------------------------------------------

def simulate_shot(model, geom: AcquisitionGeometry, wavelet: SourceWavelet,
                  cfg: SimConfig, source_index: int) -> ShotGather:
    if not (0 <= source_index < geom.n_sources):
        raise ParameterError(f"source index {source_index} outside [0, {geom.n_sources})")
    prop = Propagator(model, geom, cfg)
    gathers, _ = prop.run([source_index], wavelet)
    traces = gathers[0]
    if not np.isfinite(traces).all():
        raise SimulationDivergedError("non-finite samples in the gather")
    return ShotGather(traces, source_index)


def simulate_record(model, geom: AcquisitionGeometry, wavelet: SourceWavelet,
                    cfg: SimConfig) -> SeismicRecord:
    prop = Propagator(model, geom, cfg)
    gathers, _ = prop.run(list(range(geom.n_sources)), wavelet)
    if not np.isfinite(gathers).all():
        raise SimulationDivergedError("non-finite samples in the record")
    ref = getattr(model, "sample_id", None)
    return SeismicRecord(gathers, ref)


def shot_wavefield(model, geom: AcquisitionGeometry, wavelet: SourceWavelet,
                   cfg: SimConfig, source_index: int):
    """Single-shot gather plus the stored wavefield history (for adjoints
    and boundary-energy diagnostics)."""
    prop = Propagator(model, geom, cfg)
    gathers, fields = prop.run([source_index], wavelet, keep_wavefield=True)
    return ShotGather(gathers[0], source_index), fields[0]
