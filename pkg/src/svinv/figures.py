"""Figure rendering for the report and export paths.

Every CLI command that emits delimited output (CSV/JSON) renders a matching
matplotlib figure next to it. All functions take explicit file paths and
return them, so callers can echo what was written.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

VELOCITY_CMAP = "viridis"


def save_velocity_figure(grid: np.ndarray, path: str | Path, dx: float = 7.0,
                         title: str = "velocity model") -> Path:
    path = Path(path)
    nz, nx = grid.shape
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(grid, cmap=VELOCITY_CMAP, extent=(0, nx * dx, nz * dx, 0), aspect="equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("depth (m)")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="velocity (m/s)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_gather_figure(traces: np.ndarray, path: str | Path, dt: float = 0.001,
                       title: str = "shot gather") -> Path:
    path = Path(path)
    n_t, n_rec = traces.shape
    clip = np.max(np.abs(traces)) or 1.0
    fig, ax = plt.subplots(figsize=(4.2, 5.0))
    ax.imshow(traces, cmap="gray", aspect="auto", vmin=-0.25 * clip, vmax=0.25 * clip,
              extent=(-0.5, n_rec - 0.5, n_t * dt, 0.0))
    ax.set_xlabel("receiver index")
    ax.set_ylabel("time (s)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_profile_figure(depths_m: np.ndarray, profiles: dict[str, np.ndarray],
                        path: str | Path, title: str = "velocity profile") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(3.4, 5.0))
    for label, vel in profiles.items():
        ax.plot(vel, depths_m, label=label)
    ax.invert_yaxis()
    ax.set_xlabel("velocity (m/s)")
    ax.set_ylabel("depth (m)")
    ax.set_title(title)
    if len(profiles) > 1:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_misfit_figure(history: list[float], stage_iterations: list[int],
                       stage_cutoffs: list[float], path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.semilogy(np.arange(1, len(history) + 1), history, marker=".", lw=1.0)
    x = 0
    for n, fc in zip(stage_iterations, stage_cutoffs):
        if x > 0:
            ax.axvline(x + 0.5, color="gray", lw=0.7, ls="--")
        if n > 0:
            ax.text(x + n / 2.0 + 0.5, 0.97, f"{fc:g} Hz", transform=ax.get_xaxis_transform(),
                    ha="center", va="top", fontsize=8, color="gray")
        x += n
    ax.set_xlabel("iteration")
    ax.set_ylabel("stage misfit")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_report_figure(report: dict, path: str | Path) -> Path:
    """Per-subgroup L1 and SSIM bars for an evaluation report dict."""
    path = Path(path)
    subgroups = report.get("subgroups", {})
    names = list(subgroups)
    l1 = [subgroups[k]["l1"] for k in names]
    ssim = [subgroups[k]["ssim"] for k in names]
    fig, axes = plt.subplots(2, 1, figsize=(max(5.0, 0.45 * len(names)), 5.2), sharex=True)
    xs = np.arange(len(names))
    axes[0].bar(xs, l1, color="steelblue")
    axes[0].axhline(report["overall"]["l1"], color="k", lw=0.8, ls="--", label="overall")
    axes[0].set_ylabel("L1")
    axes[0].legend(fontsize=8)
    axes[1].bar(xs, ssim, color="darkseagreen")
    axes[1].axhline(report["overall"]["ssim"], color="k", lw=0.8, ls="--")
    axes[1].set_ylabel("SSIM")
    axes[1].set_ylim(min(ssim + [0.9]), 1.0)
    axes[1].set_xticks(xs)
    axes[1].set_xticklabels(names, rotation=60, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
