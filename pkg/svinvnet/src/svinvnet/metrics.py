"""Evaluation metrics on normalized velocity fields (L1, L2, SSIM, MS-SSIM).

Definitions match the benchmark toolkit exactly: affine normalization from
[1500, 4550] m/s, 11x11 Gaussian SSIM window (sigma 1.5, K1=0.01, K2=0.03,
data range 1, valid-window mode), and a 4-scale MS-SSIM (100 -> 50 -> 25 ->
12) whose weights are the first four canonical values renormalized to one.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.signal import convolve2d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
_RAW_WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363])
MSSIM_WEIGHTS = tuple(_RAW_WEIGHTS / _RAW_WEIGHTS.sum())


def _check(a: np.ndarray, b: np.ndarray):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def l1(a, b) -> float:
    a, b = _check(a, b)
    return float(np.mean(np.abs(a - b)))


def l2(a, b) -> float:
    a, b = _check(a, b)
    return float(np.mean((a - b) ** 2))


def _window() -> np.ndarray:
    half = (SSIM_WINDOW - 1) / 2.0
    g = np.exp(-((np.arange(SSIM_WINDOW) - half) ** 2) / (2.0 * SSIM_SIGMA**2))
    w = np.outer(g, g)
    return w / w.sum()


def _maps(a: np.ndarray, b: np.ndarray):
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"field smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    w = _window()
    c1, c2 = SSIM_K1**2, SSIM_K2**2
    mu_a = convolve2d(a, w, mode="valid")
    mu_b = convolve2d(b, w, mode="valid")
    var_a = convolve2d(a * a, w, mode="valid") - mu_a**2
    var_b = convolve2d(b * b, w, mode="valid") - mu_b**2
    cov = convolve2d(a * b, w, mode="valid") - mu_a * mu_b
    lum = (2 * mu_a * mu_b + c1) / (mu_a**2 + mu_b**2 + c1)
    cs = (2 * cov + c2) / (var_a + var_b + c2)
    return lum * cs, cs


def ssim(a, b) -> float:
    a, b = _check(a, b)
    full, _ = _maps(a, b)
    return float(full.mean())


def _downsample(x: np.ndarray) -> np.ndarray:
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    return x[:h, :w].reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def mssim(a, b, scales: int = 4, weights: Sequence[float] = MSSIM_WEIGHTS) -> float:
    a, b = _check(a, b)
    h, w = a.shape
    for _ in range(scales):
        if min(h, w) < SSIM_WINDOW:
            raise ValueError(f"field too small for {scales} scales")
        h, w = h // 2, w // 2
    out = 1.0
    for lvl in range(scales):
        if lvl < scales - 1:
            _, cs = _maps(a, b)
            out *= max(float(cs.mean()), 0.0) ** weights[lvl]
            a, b = _downsample(a), _downsample(b)
        else:
            out *= max(ssim(a, b), 0.0) ** weights[lvl]
    return float(out)


def metric_row(pred: np.ndarray, target: np.ndarray) -> dict[str, float]:
    return {"l1": l1(pred, target), "l2": l2(pred, target),
            "ssim": ssim(pred, target), "mssim": mssim(pred, target)}


def aggregate(rows: list[dict], subgroups: list[str]) -> dict:
    """Report dict with the shared schema: n_samples, overall, subgroups."""
    keys = ("l1", "l2", "ssim", "mssim")

    def mean_of(sel):
        return {k: float(np.mean([r[k] for r in sel])) for k in keys}

    by_group: dict[str, list[dict]] = {}
    for row, sg in zip(rows, subgroups):
        by_group.setdefault(sg, []).append(row)
    return {
        "n_samples": len(rows),
        "overall": mean_of(rows),
        "subgroups": {sg: mean_of(v) for sg, v in sorted(by_group.items())},
    }
