"""Training loss: weighted L1 plus structural-dissimilarity term.

The SSIM here matches the evaluation metric (11x11 Gaussian window, sigma
1.5, K1=0.01, K2=0.03, data range 1, no padding) and shrinks its window to
the field size when the input is smaller than 11 pixels, which keeps the
loss differentiable on toy fields.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def gaussian_window(size: int, sigma: float, dtype=torch.float32, device=None) -> torch.Tensor:
    half = (size - 1) / 2.0
    coords = torch.arange(size, dtype=dtype, device=device) - half
    g = torch.exp(-(coords**2) / (2.0 * sigma**2))
    w = torch.outer(g, g)
    return (w / w.sum()).reshape(1, 1, size, size)


def ssim(pred: torch.Tensor, target: torch.Tensor, data_range: float = 1.0) -> torch.Tensor:
    """Mean local SSIM over valid window positions, differentiable.

    Expects [B, 1, H, W]; the window shrinks to min(11, H, W) (forced odd)
    for small fields.
    """
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    h, w = pred.shape[-2:]
    size = min(SSIM_WINDOW, h, w)
    if size % 2 == 0:
        size -= 1
    win = gaussian_window(size, SSIM_SIGMA, dtype=pred.dtype, device=pred.device)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_p = F.conv2d(pred, win)
    mu_t = F.conv2d(target, win)
    e_pp = F.conv2d(pred * pred, win)
    e_tt = F.conv2d(target * target, win)
    e_pt = F.conv2d(pred * target, win)
    var_p = e_pp - mu_p**2
    var_t = e_tt - mu_t**2
    cov = e_pt - mu_p * mu_t
    ssim_map = ((2 * mu_p * mu_t + c1) * (2 * cov + c2)) / (
        (mu_p**2 + mu_t**2 + c1) * (var_p + var_t + c2)
    )
    return ssim_map.mean()


def combined_loss(pred: torch.Tensor, target: torch.Tensor,
                  lambda_l1: float = 1.0, lambda_ssim: float = 1.0) -> torch.Tensor:
    """lambda_l1 * mean|pred - target| + lambda_ssim * (1 - SSIM)."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    loss = lambda_l1 * torch.mean(torch.abs(pred - target))
    if lambda_ssim != 0.0:
        loss = loss + lambda_ssim * (1.0 - ssim(pred, target))
    return loss
