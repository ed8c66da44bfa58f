"""Training, evaluation and prediction for the inversion network.

Training follows the benchmark protocol: Adam at an initial learning rate
of 5e-3 decayed on validation-loss plateaus, batch size 32, and the
combined L1 + (1 - SSIM) objective on normalized velocity fields. Each run
writes ``curves.csv`` (epoch, train_l1, val_l1, train_ssim_loss,
val_ssim_loss), the effective configuration, and best/last checkpoints.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch.utils.data import DataLoader

from . import metrics
from .data import BenchmarkDir, GatherDataset, denormalize_velocity, load_split, normalize_record, td_ids
from .loss import combined_loss, ssim as ssim_torch
from .model import NetConfig, build_model, parameter_count


@dataclass
class TrainConfig:
    lr0: float = 5e-3
    epochs: int = 100
    batch_size: int = 32
    lambda_l1: float = 1.0
    lambda_ssim: float = 1.0
    seed: int = 0
    val_fraction: float = 0.1      # 0 validates on the training set itself
    lr_factor: float = 0.5
    lr_patience: int = 20
    lr_floor: float = 1e-5
    num_threads: int = 2
    stop_train_l1: float | None = None       # optional early stop on train L1
    anneal_at_train_l1: float | None = None  # one-shot lr drop once train L1 passes this
    anneal_lr: float = 6e-4


@dataclass
class EpochStats:
    epoch: int
    train_l1: float
    val_l1: float
    train_ssim_loss: float
    val_ssim_loss: float
    lr: float
    seconds: float


def _split_train_val(ids: Sequence[int], val_fraction: float, seed: int):
    ids = list(ids)
    if val_fraction <= 0 or len(ids) < 2:
        return ids, list(ids)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ids))
    n_val = max(1, int(round(val_fraction * len(ids))))
    val = [ids[i] for i in perm[:n_val]]
    train = [ids[i] for i in perm[n_val:]]
    if not train:
        train = val
    return train, val


@torch.no_grad()
def _epoch_metrics(model, loader, device) -> tuple[float, float]:
    model.eval()
    l1_sum, ssim_sum, n = 0.0, 0.0, 0
    for x, y in loader:
        x, y = x.to(device), y.to(device)
        pred = model(x)
        b = x.shape[0]
        l1_sum += float(torch.mean(torch.abs(pred - y))) * b
        ssim_sum += float(1.0 - ssim_torch(pred, y)) * b
        n += b
    return l1_sum / n, ssim_sum / n


def train(data_dir: str | Path, split_file: str | Path, td_level: int | str,
          cfg: TrainConfig, out_dir: str | Path,
          net_cfg: NetConfig = NetConfig(), quiet: bool = False) -> dict:
    """Train on the selected TD level; returns a summary dict.

    Writes ``checkpoint.pt`` (best validation loss), ``last.pt``,
    ``curves.csv`` and ``config.json`` into ``out_dir``.
    """
    torch.set_num_threads(cfg.num_threads)
    torch.manual_seed(cfg.seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bench = BenchmarkDir(data_dir)
    split = load_split(split_file)
    ids = td_ids(split, td_level)
    train_ids, val_ids = _split_train_val(ids, cfg.val_fraction, cfg.seed)
    train_set = GatherDataset(bench, train_ids)
    val_set = GatherDataset(bench, val_ids)
    gen = torch.Generator().manual_seed(cfg.seed)
    train_loader = DataLoader(train_set, batch_size=cfg.batch_size, shuffle=True, generator=gen)
    val_loader = DataLoader(val_set, batch_size=max(cfg.batch_size, 8))
    device = torch.device("cpu")
    model = build_model(net_cfg).to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr0)
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, factor=cfg.lr_factor, patience=cfg.lr_patience, min_lr=cfg.lr_floor)

    with open(out_dir / "config.json", "w", encoding="utf-8") as f:
        json.dump({"data": str(data_dir), "splits": str(split_file), "td": str(td_level),
                   "train": asdict(cfg), "parameters": parameter_count(model),
                   "n_train": len(train_ids), "n_val": len(val_ids)}, f, indent=1)

    curves_path = out_dir / "curves.csv"
    best_val = math.inf
    history: list[EpochStats] = []
    annealed = False
    with open(curves_path, "w", newline="", encoding="utf-8") as curves:
        writer = csv.writer(curves)
        writer.writerow(["epoch", "train_l1", "val_l1", "train_ssim_loss", "val_ssim_loss"])
        for epoch in range(cfg.epochs):
            t0 = time.perf_counter()
            model.train()
            for x, y in train_loader:
                x, y = x.to(device), y.to(device)
                optimizer.zero_grad()
                loss = combined_loss(model(x), y, cfg.lambda_l1, cfg.lambda_ssim)
                if not torch.isfinite(loss):
                    raise RuntimeError(f"non-finite loss at epoch {epoch}")
                loss.backward()
                optimizer.step()
            train_l1, train_sl = _epoch_metrics(model, train_loader, device)
            val_l1, val_sl = _epoch_metrics(model, val_loader, device)
            val_total = cfg.lambda_l1 * val_l1 + cfg.lambda_ssim * val_sl
            if (cfg.anneal_at_train_l1 is not None and not annealed
                    and train_l1 < cfg.anneal_at_train_l1):
                for group in optimizer.param_groups:
                    group["lr"] = cfg.anneal_lr
                annealed = True
            elif cfg.anneal_at_train_l1 is None:
                scheduler.step(val_total)
            lr_now = optimizer.param_groups[0]["lr"]
            stats = EpochStats(epoch, train_l1, val_l1, train_sl, val_sl, lr_now,
                               time.perf_counter() - t0)
            history.append(stats)
            writer.writerow([epoch, f"{train_l1:.8f}", f"{val_l1:.8f}",
                             f"{train_sl:.8f}", f"{val_sl:.8f}"])
            curves.flush()
            if val_total < best_val:
                best_val = val_total
                _save_checkpoint(out_dir / "checkpoint.pt", model, net_cfg, cfg, epoch)
            if not quiet:
                print(f"epoch {epoch}: train_l1={train_l1:.5f} val_l1={val_l1:.5f} "
                      f"lr={lr_now:.2e} ({stats.seconds:.1f}s)", flush=True)
            if cfg.stop_train_l1 is not None and train_l1 < cfg.stop_train_l1:
                break
    _save_checkpoint(out_dir / "last.pt", model, net_cfg, cfg, history[-1].epoch)
    return {
        "epochs_run": len(history),
        "final_train_l1": history[-1].train_l1,
        "final_val_l1": history[-1].val_l1,
        "best_val_loss": best_val,
        "curves": str(curves_path),
        "checkpoint": str(out_dir / "checkpoint.pt"),
        "last": str(out_dir / "last.pt"),
    }


def _save_checkpoint(path: Path, model, net_cfg: NetConfig, train_cfg: TrainConfig, epoch: int):
    torch.save({
        "model_state": model.state_dict(),
        "net_config": asdict(net_cfg),
        "train_config": asdict(train_cfg),
        "epoch": epoch,
    }, path)


def load_checkpoint(path: str | Path):
    from .model import DenseBlockConfig
    payload = torch.load(path, map_location="cpu", weights_only=False)
    kw = dict(payload["net_config"])
    dense = kw.pop("dense", None)
    # tuples arrive as lists through the asdict round trip
    for key in ("time_reduction", "encoder_blocks", "decoder_blocks"):
        kw[key] = tuple(tuple(t) for t in kw[key])
    for key in ("decoder_channels", "skip_sizes"):
        kw[key] = tuple(kw[key])
    net_cfg = NetConfig(**kw, dense=DenseBlockConfig(**dense) if isinstance(dense, dict)
                        else DenseBlockConfig())
    model = build_model(net_cfg)
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model, net_cfg


@torch.no_grad()
def predict(model, record: np.ndarray) -> np.ndarray:
    """Velocity model (m/s) predicted from one [n_src, n_t, n_rec] record."""
    if record.ndim != 3:
        raise ValueError(f"expected one record [n_src, n_t, n_rec], got {record.shape}")
    x = torch.from_numpy(normalize_record(record)).unsqueeze(0)
    model.eval()
    out = model(x)[0, 0].numpy()
    return denormalize_velocity(out)


def predict_many(model, records) -> list[np.ndarray]:
    """Predictions for a sequence of records, in input order."""
    return [predict(model, rec) for rec in records]


def evaluate_dirs(pred_dir: str | Path, target_dir: str | Path) -> dict:
    """Metric report between two model datasets on disk (shared schema).

    Mirrors the benchmark toolkit's ``evaluate`` command so reports from the
    two implementations can be compared on identical fixtures.
    """
    from .data import V_HI, V_LO
    preds = BenchmarkDir(pred_dir)
    targets = BenchmarkDir(target_dir)
    if len(preds) != len(targets):
        raise ValueError(f"prediction count {len(preds)} != target count {len(targets)}")

    def norm64(grid):
        return (np.asarray(grid, dtype=np.float64) - V_LO) / (V_HI - V_LO)

    rows, subgroups = [], []
    for i in range(len(preds)):
        rows.append(metrics.metric_row(norm64(preds.model(i)), norm64(targets.model(i))))
        subgroups.append(targets.info(i).subgroup)
    return metrics.aggregate(rows, subgroups)


@torch.no_grad()
def evaluate(model, data_dir: str | Path, ids: Sequence[int],
             batch_size: int = 8) -> dict:
    """Metric report over the given sample ids, shared-schema dict."""
    bench = BenchmarkDir(data_dir)
    dataset = GatherDataset(bench, list(ids))
    loader = DataLoader(dataset, batch_size=batch_size)
    model.eval()
    rows: list[dict] = []
    subgroups: list[str] = []
    index_of = {info.id: i for i, info in enumerate(bench.samples)}
    k = 0
    for x, y in loader:
        pred = model(x).numpy()[:, 0]
        tgt = y.numpy()[:, 0]
        for j in range(pred.shape[0]):
            rows.append(metrics.metric_row(pred[j], tgt[j]))
            subgroups.append(bench.info(index_of[dataset.ids[k]]).subgroup)
            k += 1
    return metrics.aggregate(rows, subgroups)
