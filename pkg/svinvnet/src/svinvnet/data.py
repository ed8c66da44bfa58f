"""Reader for benchmark dataset directories and split files.

The on-disk layout is the published container contract:

* ``manifest.json`` with ``format_version`` 1, sample shapes and per-sample
  metadata ``{id, n_layers, subtype, seed}``
* ``models.f32``: little-endian float32, C order, [N, 100, 100] (m/s)
* ``records.f32``: [N, 20, 1000, 34]
* split JSON: ``{"test": [...], "train": {"TD-1": [...], ...}}``

Velocities map affinely from [1500, 4550] m/s to [0, 1]; seismic records
are normalized per record by their standard deviation. Gathers are sparse
(direct-wave peaks carry almost all the amplitude), so peak normalization
would leave typical samples near 1e-3, small enough that convolution
biases drown the inter-record signal; unit-variance scaling keeps the
input scale-free while preserving it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from torch.utils.data import Dataset

V_LO = 1500.0
V_HI = 4550.0
SUPPORTED_FORMAT = 1


def normalize_velocity(grid: np.ndarray) -> np.ndarray:
    return (np.asarray(grid, dtype=np.float32) - V_LO) / (V_HI - V_LO)


def denormalize_velocity(values: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * (V_HI - V_LO) + V_LO


def normalize_record(record: np.ndarray) -> np.ndarray:
    rec = np.asarray(record, dtype=np.float32)
    scale = float(rec.std())
    return rec / scale if scale > 0 else rec


@dataclass(frozen=True)
class SampleInfo:
    id: int
    n_layers: int
    subtype: str
    seed: int

    @property
    def subgroup(self) -> str:
        return f"{self.n_layers}-{self.subtype}"


class BenchmarkDir:
    """Memory-mapped view of one dataset directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        with open(self.directory / "manifest.json", encoding="utf-8") as f:
            m = json.load(f)
        if m.get("format_version") != SUPPORTED_FORMAT:
            raise ValueError(f"unsupported dataset format_version {m.get('format_version')!r}")
        self.manifest = m
        self.samples = [SampleInfo(s["id"], s["n_layers"], s["subtype"], s["seed"])
                        for s in m["samples"]]
        n = m["n_samples"]
        mshape = (n,) + tuple(m["model_shape"])
        self._models = np.memmap(self.directory / "models.f32", dtype="<f4", mode="r",
                                 shape=mshape) if n else np.zeros(mshape, "<f4")
        self._records = None
        if m.get("record_shape"):
            rshape = (n,) + tuple(m["record_shape"])
            self._records = np.memmap(self.directory / "records.f32", dtype="<f4", mode="r",
                                      shape=rshape) if n else np.zeros(rshape, "<f4")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def has_records(self) -> bool:
        return self._records is not None

    def model(self, i: int) -> np.ndarray:
        return np.array(self._models[i])

    def record(self, i: int) -> np.ndarray:
        if self._records is None:
            raise ValueError("dataset has no seismic records")
        return np.array(self._records[i])

    def info(self, i: int) -> SampleInfo:
        return self.samples[i]


def load_split(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as f:
        s = json.load(f)
    if "test" not in s or "train" not in s:
        raise ValueError("split file must carry 'test' and 'train' keys")
    return s


def td_ids(split: dict, level: int | str) -> list[int]:
    key = level if isinstance(level, str) else f"TD-{level}"
    try:
        return list(split["train"][key])
    except KeyError:
        raise ValueError(f"split has no training level {key!r}; "
                         f"available: {sorted(split['train'])}") from None


class GatherDataset(Dataset):
    """(normalized record, normalized model) pairs for selected sample ids."""

    def __init__(self, bench: BenchmarkDir, ids: Sequence[int]):
        if not bench.has_records:
            raise ValueError("training needs a dataset with seismic records")
        self.bench = bench
        self.ids = list(ids)
        index_of = {info.id: i for i, info in enumerate(bench.samples)}
        missing = [i for i in self.ids if i not in index_of]
        if missing:
            raise ValueError(f"ids not present in dataset: {missing[:5]}")
        self._rows = [index_of[i] for i in self.ids]

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, k: int):
        row = self._rows[k]
        x = torch.from_numpy(normalize_record(self.bench.record(row)))
        y = torch.from_numpy(normalize_velocity(self.bench.model(row))).unsqueeze(0)
        return x, y
