"""Evaluation metrics on normalized velocity fields: L1, L2, SSIM, MS-SSIM.

Velocities are mapped affinely from [1500, 4550] m/s to [0, 1] before any
metric is computed. SSIM uses an 11x11 Gaussian window (sigma 1.5) with
K1=0.01, K2=0.03 at data range 1, evaluated in valid-window mode (no
padding). The multi-scale variant runs 4 dyadic scales (100 -> 50 -> 25 ->
12), with the first four canonical weights renormalized to sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.signal import convolve2d

from .geomodel import VelocityModel

V_LO = 1500.0
V_HI = 4550.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# First four weights of the canonical five-scale MS-SSIM weighting,
# renormalized to sum to 1.
_MSSIM_RAW = np.array([0.0448, 0.2856, 0.3001, 0.2363])
MSSIM_WEIGHTS = tuple(_MSSIM_RAW / _MSSIM_RAW.sum())
MSSIM_SCALES = 4


@dataclass(frozen=True)
class NormalizedField:
    values: np.ndarray
    source_range: tuple[float, float] = (V_LO, V_HI)


def _vals(x) -> np.ndarray:
    if isinstance(x, NormalizedField):
        return x.values
    return np.asarray(x, dtype=float)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    av, bv = _vals(a), _vals(b)
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    return av, bv


def normalize_velocity(model) -> NormalizedField:
    """Affine map (v - 1500) / (4550 - 1500); cells must lie in range."""
    grid = model.grid if isinstance(model, VelocityModel) else np.asarray(model, dtype=float)
    if np.min(grid) < V_LO - 1e-3 or np.max(grid) > V_HI + 1e-3:
        raise ValueError(
            f"velocities outside [{V_LO}, {V_HI}] m/s cannot be normalized "
            f"(found [{np.min(grid):.1f}, {np.max(grid):.1f}])"
        )
    return NormalizedField(np.clip((np.asarray(grid, dtype=float) - V_LO) / (V_HI - V_LO), 0.0, 1.0))


def denormalize(f) -> np.ndarray:
    return _vals(f) * (V_HI - V_LO) + V_LO


def l1(a, b) -> float:
    av, bv = _pair(a, b)
    return float(np.mean(np.abs(av - bv)))


def l2(a, b) -> float:
    av, bv = _pair(a, b)
    return float(np.mean((av - bv) ** 2))


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    g = np.exp(-((np.arange(size) - half) ** 2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_maps(av, bv, data_range=1.0):
    """Local SSIM and contrast-structure maps (valid-window convolution)."""
    w = _gaussian_window()
    if min(av.shape) < SSIM_WINDOW:
        raise ValueError(f"field smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a = convolve2d(av, w, mode="valid")
    mu_b = convolve2d(bv, w, mode="valid")
    e_aa = convolve2d(av * av, w, mode="valid")
    e_bb = convolve2d(bv * bv, w, mode="valid")
    e_ab = convolve2d(av * bv, w, mode="valid")
    var_a = e_aa - mu_a**2
    var_b = e_bb - mu_b**2
    cov = e_ab - mu_a * mu_b
    lum = (2 * mu_a * mu_b + c1) / (mu_a**2 + mu_b**2 + c1)
    cs = (2 * cov + c2) / (var_a + var_b + c2)
    return lum * cs, cs


def ssim(a, b) -> float:
    """Mean local SSIM over valid window positions."""
    av, bv = _pair(a, b)
    full, _ = _ssim_maps(av, bv)
    return float(full.mean())


def contrast_structure(a, b) -> float:
    """Mean contrast-structure factor; the per-scale term of MS-SSIM."""
    av, bv = _pair(a, b)
    _, cs = _ssim_maps(av, bv)
    return float(cs.mean())


def downsample2(x: np.ndarray) -> np.ndarray:
    """2x2 average pooling, truncating odd trailing rows/columns."""
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    return x[:h, :w].reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def mssim(a, b, scales: int = MSSIM_SCALES, weights: Sequence[float] = MSSIM_WEIGHTS) -> float:
    """Multi-scale SSIM over dyadic scales.

    Contrast-structure factors are taken at the first ``scales - 1`` levels
    and the full SSIM at the coarsest; factors are clipped at zero before
    the weighted geometric combination.
    """
    av, bv = _pair(a, b)
    if len(weights) != scales:
        raise ValueError("one weight per scale is required")
    h, w = av.shape
    for lvl in range(scales):
        if min(h, w) < SSIM_WINDOW:
            raise ValueError(
                f"field too small for {scales} scales: level {lvl} is {h}x{w} "
                f"(< {SSIM_WINDOW}x{SSIM_WINDOW} window)"
            )
        h, w = h // 2, w // 2
    factors = []
    for lvl in range(scales):
        if lvl < scales - 1:
            factors.append(contrast_structure(av, bv))
            av, bv = downsample2(av), downsample2(bv)
        else:
            factors.append(ssim(av, bv))
    result = 1.0
    for f, wt in zip(factors, weights):
        result *= max(f, 0.0) ** wt
    return float(result)


# ---------------------------------------------------------------------------
# Batch evaluation
# ---------------------------------------------------------------------------

@dataclass
class MetricsReport:
    overall: dict[str, float]
    subgroups: dict[str, dict[str, float]]
    n_samples: int
    per_sample: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "overall": self.overall,
            "subgroups": self.subgroups,
        }


def _metric_row(pred_field: NormalizedField, tgt_field: NormalizedField) -> dict[str, float]:
    return {
        "l1": l1(pred_field, tgt_field),
        "l2": l2(pred_field, tgt_field),
        "ssim": ssim(pred_field, tgt_field),
        "mssim": mssim(pred_field, tgt_field),
    }


def _mean_rows(rows: Sequence[Mapping[str, float]]) -> dict[str, float]:
    return {k: float(np.mean([r[k] for r in rows])) for k in ("l1", "l2", "ssim", "mssim")}


def subgroup_key(n_layers: int, subtype: str) -> str:
    return f"{n_layers}-{subtype}"


def evaluate_batch(preds: Sequence[VelocityModel], targets: Sequence[VelocityModel]) -> MetricsReport:
    """Per-sample metrics averaged overall and per (n_layers, subtype)."""
    if len(preds) != len(targets):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(targets)} targets")
    rows = []
    groups: dict[str, list[dict]] = {}
    for p, t in zip(preds, targets):
        if p.sample_id is not None and t.sample_id is not None and p.sample_id != t.sample_id:
            raise ValueError(f"sample id mismatch: {p.sample_id} vs {t.sample_id}")
        row = _metric_row(normalize_velocity(p), normalize_velocity(t))
        row["id"] = t.sample_id
        rows.append(row)
        groups.setdefault(subgroup_key(t.n_layers, t.category), []).append(row)
    return MetricsReport(
        overall=_mean_rows(rows),
        subgroups={k: _mean_rows(v) for k, v in sorted(groups.items())},
        n_samples=len(rows),
        per_sample=rows,
    )
