"""Bit-exact dataset container and the train/test split protocol.

A dataset directory holds:

* ``manifest.json``  - UTF-8 JSON with shapes, acquisition parameters and
  per-sample metadata (id, n_layers, subtype, seed)
* ``models.f32``     - little-endian float32, C row-major, [N, 100, 100]
* ``records.f32``    - [N, 20, 1000, 34]; absent for model-only datasets
* ``labels.csv``     - header ``id,n_layers,subtype,seed``

Writes go to a temporary sibling directory and are renamed into place so a
reader never observes a half-written dataset. Blob sizes are cross-checked
against the manifest before any sample access.
"""

from __future__ import annotations

import csv
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DatasetCorruptionError, UnsupportedVersionError
from .geomodel import VelocityModel

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
MODELS_BLOB = "models.f32"
RECORDS_BLOB = "records.f32"
LABELS_NAME = "labels.csv"

MODEL_SHAPE = (100, 100)
RECORD_SHAPE = (20, 1000, 34)


@dataclass
class SampleMeta:
    id: int
    n_layers: int
    subtype: str
    seed: int

    def to_dict(self) -> dict:
        return {"id": self.id, "n_layers": self.n_layers, "subtype": self.subtype, "seed": self.seed}


@dataclass
class DatasetManifest:
    n_samples: int
    samples: list[SampleMeta]
    model_shape: tuple[int, ...] = MODEL_SHAPE
    record_shape: tuple[int, ...] | None = RECORD_SHAPE
    dx_m: float = 7.0
    dt_s: float = 0.001
    n_t: int = 1000
    source_cols: list[int] = field(default_factory=list)
    receiver_cols: list[int] = field(default_factory=list)
    noise: bool = False
    noise_config: dict | None = None
    suite_seed: int | None = None
    sim_params: dict | None = None
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "n_samples": self.n_samples,
            "model_shape": list(self.model_shape),
            "record_shape": list(self.record_shape) if self.record_shape else None,
            "dx_m": self.dx_m,
            "dt_s": self.dt_s,
            "n_t": self.n_t,
            "source_cols": list(self.source_cols),
            "receiver_cols": list(self.receiver_cols),
            "noise": self.noise,
            "noise_config": self.noise_config,
            "suite_seed": self.suite_seed,
            "sim_params": self.sim_params,
            "samples": [s.to_dict() for s in self.samples],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        if d.get("format_version") != FORMAT_VERSION:
            raise UnsupportedVersionError(
                f"manifest format_version {d.get('format_version')!r} is not supported "
                f"(this build reads version {FORMAT_VERSION})"
            )
        samples = [SampleMeta(**s) for s in d["samples"]]
        return cls(
            n_samples=d["n_samples"],
            samples=samples,
            model_shape=tuple(d["model_shape"]),
            record_shape=tuple(d["record_shape"]) if d.get("record_shape") else None,
            dx_m=d.get("dx_m", 7.0),
            dt_s=d.get("dt_s", 0.001),
            n_t=d.get("n_t", 1000),
            source_cols=d.get("source_cols", []),
            receiver_cols=d.get("receiver_cols", []),
            noise=d.get("noise", False),
            noise_config=d.get("noise_config"),
            suite_seed=d.get("suite_seed"),
            sim_params=d.get("sim_params"),
        )


class DatasetWriter:
    """Streaming writer; blobs grow sample by sample, finalize() is atomic."""

    def __init__(self, out_dir: str | Path, record_shape: tuple[int, ...] | None = RECORD_SHAPE,
                 model_shape: tuple[int, ...] = MODEL_SHAPE, overwrite: bool = False):
        self.out_dir = Path(out_dir)
        if self.out_dir.exists() and not overwrite:
            raise FileExistsError(f"{self.out_dir} already exists")
        self.model_shape = tuple(model_shape)
        self.record_shape = tuple(record_shape) if record_shape else None
        self._tmp = Path(tempfile.mkdtemp(prefix=self.out_dir.name + ".tmp-",
                                          dir=self.out_dir.parent or "."))
        self._models = open(self._tmp / MODELS_BLOB, "wb")
        self._records = open(self._tmp / RECORDS_BLOB, "wb") if self.record_shape else None
        self._meta: list[SampleMeta] = []

    def add(self, model: VelocityModel, record: np.ndarray | None = None) -> None:
        grid = np.asarray(model.grid)
        if grid.shape != self.model_shape:
            raise ValueError(f"model shape {grid.shape} != {self.model_shape}")
        self._models.write(np.ascontiguousarray(grid, dtype="<f4").tobytes())
        if self.record_shape is not None:
            rec = np.asarray(record)
            if rec.shape != self.record_shape:
                raise ValueError(f"record shape {rec.shape} != {self.record_shape}")
            self._records.write(np.ascontiguousarray(rec, dtype="<f4").tobytes())
        elif record is not None:
            raise ValueError("writer was opened without a record blob")
        sid = model.sample_id if model.sample_id is not None else len(self._meta)
        self._meta.append(SampleMeta(sid, model.n_layers, model.category, model.seed))

    def finalize(self, **manifest_kwargs) -> DatasetManifest:
        self._models.close()
        if self._records:
            self._records.close()
        ids = [m.id for m in self._meta]
        if ids != list(range(len(ids))):
            raise ValueError("sample ids must be unique and contiguous from 0")
        manifest = DatasetManifest(
            n_samples=len(self._meta),
            samples=self._meta,
            model_shape=self.model_shape,
            record_shape=self.record_shape,
            **manifest_kwargs,
        )
        with open(self._tmp / MANIFEST_NAME, "w", encoding="utf-8") as f:
            json.dump(manifest.to_dict(), f, indent=1)
        with open(self._tmp / LABELS_NAME, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["id", "n_layers", "subtype", "seed"])
            for m in self._meta:
                w.writerow([m.id, m.n_layers, m.subtype, m.seed])
        if self.out_dir.exists():
            shutil.rmtree(self.out_dir)
        os.replace(self._tmp, self.out_dir)
        return manifest

    def abort(self) -> None:
        shutil.rmtree(self._tmp, ignore_errors=True)


def write_dataset(out_dir: str | Path,
                  samples: Iterable[tuple[VelocityModel, np.ndarray | None]],
                  overwrite: bool = False,
                  **manifest_kwargs) -> DatasetManifest:
    samples = list(samples)
    has_records = any(rec is not None for _, rec in samples)
    record_shape = RECORD_SHAPE if has_records else None
    writer = DatasetWriter(out_dir, record_shape=record_shape, overwrite=overwrite)
    try:
        for model, rec in samples:
            writer.add(model, rec)
        return writer.finalize(**manifest_kwargs)
    except BaseException:
        writer.abort()
        raise


class Dataset:
    """Validated, lazily loadable view of a dataset directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        manifest_path = self.directory / MANIFEST_NAME
        if not manifest_path.exists():
            raise FileNotFoundError(f"no {MANIFEST_NAME} in {self.directory}")
        with open(manifest_path, encoding="utf-8") as f:
            self.manifest = DatasetManifest.from_dict(json.load(f))
        self._check_blob(MODELS_BLOB, self.manifest.model_shape)
        if self.manifest.record_shape:
            self._check_blob(RECORDS_BLOB, self.manifest.record_shape)
        n = self.manifest.n_samples
        mshape = (n,) + tuple(self.manifest.model_shape)
        self._models = np.memmap(self.directory / MODELS_BLOB, dtype="<f4", mode="r",
                                 shape=mshape) if n else np.zeros(mshape, dtype="<f4")
        self._records = None
        if self.manifest.record_shape:
            rshape = (n,) + tuple(self.manifest.record_shape)
            self._records = np.memmap(self.directory / RECORDS_BLOB, dtype="<f4", mode="r",
                                      shape=rshape) if n else np.zeros(rshape, dtype="<f4")

    def _check_blob(self, name: str, shape: tuple[int, ...]) -> None:
        path = self.directory / name
        if not path.exists():
            raise DatasetCorruptionError(f"missing blob {name}")
        expected = 4 * self.manifest.n_samples * int(np.prod(shape))
        actual = path.stat().st_size
        if actual != expected:
            raise DatasetCorruptionError(
                f"blob {name} is {actual} bytes, manifest implies {expected}"
            )

    def __len__(self) -> int:
        return self.manifest.n_samples

    @property
    def has_records(self) -> bool:
        return self._records is not None

    def model_grid(self, i: int) -> np.ndarray:
        return np.array(self._models[i], dtype=np.float64)

    def model(self, i: int) -> VelocityModel:
        meta = self.manifest.samples[i]
        return VelocityModel(self.model_grid(i), meta.subtype, meta.n_layers,
                             meta.seed, (), sample_id=meta.id)

    def record(self, i: int) -> np.ndarray:
        if self._records is None:
            raise DatasetCorruptionError("dataset has no seismic records")
        return np.array(self._records[i], dtype=np.float32)

    def subgroup_ids(self) -> dict[tuple[int, str], list[int]]:
        groups: dict[tuple[int, str], list[int]] = {}
        for m in self.manifest.samples:
            groups.setdefault((m.n_layers, m.subtype), []).append(m.id)
        return groups


def read_dataset(directory: str | Path) -> Dataset:
    return Dataset(directory)


# ---------------------------------------------------------------------------
# Split protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    test_per_subgroup: int
    train_sizes: tuple[int, ...]
    seed: int = 0
    nested: bool = True

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.train_sizes)
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("train sizes must be strictly increasing")
        if self.test_per_subgroup < 1 or (sizes and sizes[0] < 1):
            raise ValueError("split sizes must be positive")
        object.__setattr__(self, "train_sizes", sizes)


@dataclass
class Split:
    test: list[int]
    train: dict[str, list[int]]
    spec: SplitSpec

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "train": self.train,
            "spec": {
                "test_per_subgroup": self.spec.test_per_subgroup,
                "train_sizes": list(self.spec.train_sizes),
                "seed": self.spec.seed,
                "nested": self.spec.nested,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Split":
        s = d["spec"]
        return cls(test=list(d["test"]),
                   train={k: list(v) for k, v in d["train"].items()},
                   spec=SplitSpec(s["test_per_subgroup"], tuple(s["train_sizes"]),
                                  s["seed"], s.get("nested", True)))


def td_name(level: int) -> str:
    return f"TD-{level}"


def split(dataset: Dataset | DatasetManifest, spec: SplitSpec) -> Split:
    """Random per-subgroup test selection plus nested training subsets.

    Training levels are drawn from the remainder after the test draw, so
    train and test never overlap; with ``spec.nested`` each level extends
    the previous one.
    """
    manifest = dataset.manifest if isinstance(dataset, Dataset) else dataset
    groups: dict[tuple[int, str], list[int]] = {}
    for m in manifest.samples:
        groups.setdefault((m.n_layers, m.subtype), []).append(m.id)
    need = spec.test_per_subgroup + (max(spec.train_sizes) if spec.train_sizes else 0)
    for key, ids in groups.items():
        if len(ids) < need:
            raise ValueError(
                f"subgroup {key} has {len(ids)} samples; spec needs {need} per subgroup"
            )
    rng = np.random.default_rng(spec.seed)
    test: list[int] = []
    train: dict[str, list[int]] = {td_name(i + 1): [] for i in range(len(spec.train_sizes))}
    for key in sorted(groups):
        ids = np.array(sorted(groups[key]))
        perm = ids[rng.permutation(len(ids))]
        test.extend(int(x) for x in perm[: spec.test_per_subgroup])
        pool = perm[spec.test_per_subgroup:]
        if spec.nested:
            for lvl, size in enumerate(spec.train_sizes):
                train[td_name(lvl + 1)].extend(int(x) for x in pool[:size])
        else:
            for lvl, size in enumerate(spec.train_sizes):
                sub = pool[rng.permutation(len(pool))[:size]]
                train[td_name(lvl + 1)].extend(int(x) for x in sub)
    test.sort()
    for v in train.values():
        v.sort()
    return Split(test=test, train=train, spec=spec)


def save_split(path: str | Path, s: Split) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(s.to_dict(), f, indent=1)


def load_split(path: str | Path) -> Split:
    with open(path, encoding="utf-8") as f:
        return Split.from_dict(json.load(f))
