import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and report.failed and "test_acceptance" in str(item.fspath):
        print(f"\nACCEPTANCE FAIL: {item.name}")


def write_tiny_dataset(directory: Path, n: int = 4, n_t: int = 1000, seed: int = 0,
                       with_records: bool = True) -> Path:
    """Hand-built dataset directory following the published container layout."""
    directory.mkdir(parents=True)
    rng = np.random.default_rng(seed)
    subgroups = [(4, "layered"), (4, "fault"), (5, "salt"), (6, "layered")]
    samples = []
    models = np.zeros((n, 100, 100), dtype="<f4")
    for i in range(n):
        nl, st = subgroups[i % len(subgroups)]
        base = rng.uniform(1600, 2400)
        models[i] = base + 15.0 * np.arange(100)[:, None]
        samples.append({"id": i, "n_layers": nl, "subtype": st, "seed": int(seed) + i})
    models.tofile(directory / "models.f32")
    record_shape = [20, n_t, 34] if with_records else None
    if with_records:
        records = rng.normal(size=(n, 20, n_t, 34)).astype("<f4")
        records.tofile(directory / "records.f32")
    manifest = {
        "format_version": 1,
        "n_samples": n,
        "model_shape": [100, 100],
        "record_shape": record_shape,
        "dx_m": 7.0,
        "dt_s": 0.001,
        "n_t": n_t,
        "source_cols": list(range(2, 98, 5)),
        "receiver_cols": list(range(0, 100, 3)),
        "noise": False,
        "noise_config": None,
        "suite_seed": seed,
        "samples": samples,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest))
    labels = ["id,n_layers,subtype,seed"] + [
        f"{s['id']},{s['n_layers']},{s['subtype']},{s['seed']}" for s in samples]
    (directory / "labels.csv").write_text("\n".join(labels) + "\n")
    return directory


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    return write_tiny_dataset(tmp_path_factory.mktemp("tiny") / "ds")


def _svinv(*argv):
    cmd = [shutil.which("svinv") or "svinv", *map(str, argv)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} failed ({proc.returncode}):\n{proc.stderr}")
    return proc.stdout


@pytest.fixture(scope="session")
def desk_benchmark(tmp_path_factory):
    """Desk-scale dataset built through the benchmark toolkit's CLI:
    12 samples per subgroup, simulated records, and a 4-test / {2, 8}-train
    split. Takes a few minutes; shared by the acceptance tests."""
    root = tmp_path_factory.mktemp("desk")
    models = root / "models"
    data = root / "data"
    splits = root / "splits.json"
    _svinv("generate", "--per-subgroup", 12, "--seed", 31415, "--out", models, "--jobs", 2)
    _svinv("simulate", "--models", models, "--out", data, "--nt", 1000,
           "--freq", 20, "--precision", 32, "--jobs", 2)
    _svinv("split", "--dataset", data, "--test-per-subgroup", 4,
           "--train-sizes", "2,8", "--seed", 99, "--out", splits)
    return {"data": data, "splits": splits, "models": models}
