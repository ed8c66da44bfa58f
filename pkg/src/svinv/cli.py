"""Command-line entry point wiring the toolkit into one pipeline.

Subcommands: generate, simulate, add-noise, split, fwi, evaluate,
export-profile, export-gather. Every run echoes its effective configuration
into the output location, so re-running with ``--config <echo>`` reproduces
the outputs bit-exactly. Flags override config-file values; ``--seed`` falls
back to the SVINV_SEED environment variable.

Exit codes: 0 success, 2 usage, 3 validation/configuration, 4 runtime
simulation failure. Failures print one line ``error:<category>: <message>``
to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio, figures, fwi, metrics
from . import geomodel as gm
from . import noise as nz
from . import wavesim as ws
from .errors import (
    ConfigurationError,
    DatasetCorruptionError,
    GenerationExhaustedError,
    ParameterError,
    SimulationDivergedError,
    SvinvError,
    UnsupportedVersionError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise ParameterError("config file must hold a JSON object")
    return cfg


def _pick(flag_value, cfg: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if key in cfg and cfg[key] is not None:
        return cfg[key]
    return default


def _resolve_seed(flag_value, cfg: dict, default: int = 0) -> int:
    if flag_value is not None:
        return int(flag_value)
    if cfg.get("seed") is not None:
        return int(cfg["seed"])
    env = os.environ.get("SVINV_SEED")
    return int(env) if env else default


def _echo_config(directory: Path, command: str, effective: dict) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, **effective}
    with open(directory / "config.json", "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1, sort_keys=True)


def _echo_sibling(path: Path, command: str, effective: dict) -> None:
    echo = path.with_name(path.stem + ".config.json")
    with open(echo, "w", encoding="utf-8") as f:
        json.dump({"command": command, **effective}, f, indent=1, sort_keys=True)


def _parse_layer_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
    elif "-" in text:
        lo, hi = text.split("-", 1)
    else:
        lo = hi = text
    return int(lo), int(hi)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def _gen_worker(args):
    index, n_layers, subtype, sample_seed = args
    model = gm.generate_one(n_layers, subtype, sample_seed)
    return index, model.grid.astype(np.float32), n_layers, subtype, sample_seed


def cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    layer_lo, layer_hi = _parse_layer_range(_pick(args.layers, cfg, "layers", "4..8"))
    per_subgroup = int(_pick(args.per_subgroup, cfg, "per_subgroup", 1))
    seed = _resolve_seed(args.seed, cfg)
    jobs = int(_pick(args.jobs, cfg, "jobs", os.cpu_count() or 1))
    out = Path(_pick(args.out, cfg, "out", None) or _fail("missing --out"))

    subgroups = [(n, cat) for n in range(layer_lo, layer_hi + 1) for cat in gm.CATEGORIES]
    tasks = []
    index = 0
    for n_layers, subtype in subgroups:
        for _ in range(per_subgroup):
            tasks.append((index, n_layers, subtype, gm.sample_seed_for(seed, index)))
            index += 1
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_gen_worker, tasks, chunksize=8))
        results.sort(key=lambda r: r[0])
    else:
        results = [_gen_worker(t) for t in tasks]

    writer = dataio.DatasetWriter(out, record_shape=None, overwrite=args.overwrite)
    try:
        for idx, grid, n_layers, subtype, sample_seed in results:
            model = gm.VelocityModel(grid, subtype, n_layers, sample_seed, (), sample_id=idx)
            writer.add(model)
        writer.finalize(suite_seed=seed)
    except BaseException:
        writer.abort()
        raise
    _echo_config(out, "generate", {
        "layers": f"{layer_lo}..{layer_hi}", "per_subgroup": per_subgroup,
        "seed": seed, "jobs": jobs, "out": str(out),
    })
    print(f"generated {len(results)} models -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

_SIM_STATE: dict = {}


def _sim_init(models_dir, sim_kwargs, dx):
    # per-process state: memmapped dataset plus reusable geometry/config
    _SIM_STATE["ds"] = dataio.read_dataset(models_dir)
    _SIM_STATE["cfg"] = ws.SimConfig(**sim_kwargs)
    _SIM_STATE["geom"] = ws.default_geometry(dx)
    _SIM_STATE["wavelet"] = ws.ricker_for(_SIM_STATE["cfg"])


def _sim_worker(index: int):
    ds, cfg = _SIM_STATE["ds"], _SIM_STATE["cfg"]
    rec = ws.simulate_record(ds.model_grid(index), _SIM_STATE["geom"], _SIM_STATE["wavelet"], cfg)
    return index, rec.gathers.astype(np.float32)


def cmd_simulate(args) -> int:
    cfg_file = _load_config(args.config)
    models_dir = Path(_pick(args.models, cfg_file, "models", None) or _fail("missing --models"))
    out = Path(_pick(args.out, cfg_file, "out", None) or _fail("missing --out"))
    dt = float(_pick(args.dt, cfg_file, "dt", 0.001))
    dx = float(_pick(args.dx, cfg_file, "dx", 7.0))
    n_t = int(_pick(args.nt, cfg_file, "nt", 1000))
    freq = float(_pick(args.freq, cfg_file, "freq", 20.0))
    order = int(_pick(args.order, cfg_file, "order", 2))
    pad = int(_pick(args.pad, cfg_file, "pad", 20))
    t0 = _pick(args.t0, cfg_file, "t0", None)
    precision = int(_pick(args.precision, cfg_file, "precision", 32))
    jobs = int(_pick(args.jobs, cfg_file, "jobs", os.cpu_count() or 1))

    dtype = np.float32 if precision == 32 else np.float64
    sim_kwargs = dict(dx=dx, dt=dt, n_t=n_t, pad=pad, stencil_space_order=order,
                      source_freq=freq, t0=(float(t0) if t0 is not None else None), dtype=dtype)
    sim_cfg = ws.SimConfig(**sim_kwargs)
    ds = dataio.read_dataset(models_dir)
    if len(ds) == 0:
        raise ParameterError("models dataset is empty")
    v_max = max(float(ds.model_grid(i).max()) for i in range(len(ds)))
    v_min = min(float(ds.model_grid(i).min()) for i in range(len(ds)))
    for res in (ws.stability_check(sim_cfg, v_max), ws.dispersion_check(sim_cfg, v_min)):
        if not res.passed:
            raise ConfigurationError(f"pre-check failed: {res}")

    geom = ws.default_geometry(dx)
    indices = list(range(len(ds)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_sim_init,
                                 initargs=(models_dir, sim_kwargs, dx)) as pool:
            results = dict(pool.map(_sim_worker, indices, chunksize=1))
    else:
        _sim_init(models_dir, sim_kwargs, dx)
        results = dict(_sim_worker(i) for i in indices)

    record_shape = (geom.n_sources, n_t, geom.n_receivers)
    writer = dataio.DatasetWriter(out, record_shape=record_shape, overwrite=args.overwrite)
    try:
        for i in indices:
            writer.add(ds.model(i), results[i])
        writer.finalize(
            dx_m=dx, dt_s=dt, n_t=n_t,
            source_cols=list(geom.source_cols), receiver_cols=list(geom.receiver_cols),
            suite_seed=ds.manifest.suite_seed,
            sim_params={"source_freq": freq, "t0": sim_cfg.peak_delay, "pad": pad,
                        "stencil_space_order": order, "precision": precision},
        )
    except BaseException:
        writer.abort()
        raise
    _echo_config(out, "simulate", {
        "models": str(models_dir), "out": str(out), "dt": dt, "dx": dx, "nt": n_t,
        "freq": freq, "order": order, "pad": pad, "t0": sim_cfg.peak_delay,
        "precision": precision, "jobs": jobs,
    })
    print(f"simulated {len(indices)} records -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# add-noise
# ---------------------------------------------------------------------------

def cmd_add_noise(args) -> int:
    cfg_file = _load_config(args.config)
    src = Path(_pick(getattr(args, "in_dir"), cfg_file, "in", None) or _fail("missing --in"))
    out = Path(_pick(args.out, cfg_file, "out", None) or _fail("missing --out"))
    seed = _resolve_seed(args.seed, cfg_file)
    mix_low = float(_pick(args.mix_low, cfg_file, "mix_low", 0.05))
    mix_high = float(_pick(args.mix_high, cfg_file, "mix_high", 0.20))

    ds = dataio.read_dataset(src)
    if not ds.has_records:
        raise ParameterError("input dataset has no seismic records to add noise to")
    m = ds.manifest
    noise_cfg = nz.NoiseConfig(mix_level_range=(mix_low, mix_high), seed=seed,
                               dt=m.dt_s, n_t=m.n_t)
    geom = ws.AcquisitionGeometry(receiver_cols=tuple(m.receiver_cols),
                                  source_cols=tuple(m.source_cols), dx=m.dx_m)
    record_shape = tuple(m.record_shape)
    writer = dataio.DatasetWriter(out, record_shape=record_shape, overwrite=args.overwrite)
    try:
        for i in range(len(ds)):
            sid = m.samples[i].id
            rng = np.random.default_rng(np.random.SeedSequence((seed, sid)))
            noisy = nz.add_noise(ws.SeismicRecord(ds.record(i), sid), noise_cfg, rng, geom)
            writer.add(ds.model(i), noisy.gathers.astype(np.float32))
        writer.finalize(
            dx_m=m.dx_m, dt_s=m.dt_s, n_t=m.n_t,
            source_cols=m.source_cols, receiver_cols=m.receiver_cols,
            suite_seed=m.suite_seed, sim_params=m.sim_params,
            noise=True, noise_config=noise_cfg.to_dict(),
        )
    except BaseException:
        writer.abort()
        raise
    _echo_config(out, "add-noise", {
        "in": str(src), "out": str(out), "seed": seed,
        "mix_low": mix_low, "mix_high": mix_high,
    })
    print(f"added noise to {len(ds)} records -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# split
# ---------------------------------------------------------------------------

def cmd_split(args) -> int:
    cfg_file = _load_config(args.config)
    dataset_dir = Path(_pick(args.dataset, cfg_file, "dataset", None) or _fail("missing --dataset"))
    out = Path(_pick(args.out, cfg_file, "out", None) or _fail("missing --out"))
    test_per_subgroup = int(_pick(args.test_per_subgroup, cfg_file, "test_per_subgroup", None)
                            or _fail("missing --test-per-subgroup"))
    sizes_text = _pick(args.train_sizes, cfg_file, "train_sizes", None) or _fail("missing --train-sizes")
    if isinstance(sizes_text, str):
        train_sizes = tuple(int(x) for x in sizes_text.split(","))
    else:
        train_sizes = tuple(int(x) for x in sizes_text)
    seed = _resolve_seed(args.seed, cfg_file)
    nested = not bool(_pick(args.no_nest or None, cfg_file, "no_nest", False))

    ds = dataio.read_dataset(dataset_dir)
    spec = dataio.SplitSpec(test_per_subgroup, train_sizes, seed=seed, nested=nested)
    result = dataio.split(ds, spec)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataio.save_split(out, result)
    _echo_sibling(out, "split", {
        "dataset": str(dataset_dir), "out": str(out),
        "test_per_subgroup": test_per_subgroup, "train_sizes": list(train_sizes),
        "seed": seed, "no_nest": not nested,
    })
    sizes = {k: len(v) for k, v in result.train.items()}
    print(f"split: {len(result.test)} test ids, train {sizes} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fwi
# ---------------------------------------------------------------------------

def _sim_cfg_from_manifest(m: dataio.DatasetManifest, freq_override=None) -> ws.SimConfig:
    sp = m.sim_params or {}
    return ws.SimConfig(
        dx=m.dx_m, dt=m.dt_s, n_t=m.n_t,
        pad=int(sp.get("pad", 20)),
        stencil_space_order=int(sp.get("stencil_space_order", 2)),
        source_freq=float(freq_override or sp.get("source_freq", 20.0)),
        t0=sp.get("t0"),
    )


def cmd_fwi(args) -> int:
    cfg_file = _load_config(args.config)
    obs_dir = Path(_pick(args.obs, cfg_file, "obs", None) or _fail("missing --obs"))
    out = Path(_pick(args.out, cfg_file, "out", None) or _fail("missing --out"))
    model_index = int(_pick(args.model_index, cfg_file, "model_index", 0))
    sigma = float(_pick(args.sigma, cfg_file, "sigma", 5.0))
    cutoffs_text = _pick(args.cutoffs, cfg_file, "cutoffs", "10,15,20,25,30")
    cutoffs = tuple(float(x) for x in cutoffs_text.split(",")) if isinstance(cutoffs_text, str) \
        else tuple(float(x) for x in cutoffs_text)
    iters = int(_pick(args.iters, cfg_file, "iters", 50))
    column = int(_pick(args.column, cfg_file, "column", 50))

    ds = dataio.read_dataset(obs_dir)
    if not ds.has_records:
        raise ParameterError("observed dataset has no seismic records")
    if not (0 <= model_index < len(ds)):
        raise ParameterError(f"model index {model_index} outside [0, {len(ds)})")
    m = ds.manifest
    if m.noise:
        raise ParameterError("inversion expects a noise-free dataset")
    sim_cfg = _sim_cfg_from_manifest(m, freq_override=args.freq)
    geom = ws.AcquisitionGeometry(receiver_cols=tuple(m.receiver_cols),
                                  source_cols=tuple(m.source_cols), dx=m.dx_m)
    wavelet = ws.ricker_for(sim_cfg)
    true_model = ds.model(model_index)
    d_obs = ws.SeismicRecord(ds.record(model_index).astype(float), model_index)
    start = fwi.gaussian_smooth(true_model, sigma)
    fwi_cfg = fwi.FwiConfig(smoothing_sigma=sigma, cutoffs=cutoffs, total_iterations=iters)
    result = fwi.invert(d_obs, start, fwi_cfg, sim_cfg, geom, wavelet)

    out.mkdir(parents=True, exist_ok=True)
    result.model.grid.astype("<f4").tofile(out / "inverted_model.f32")
    with open(out / "misfit.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["iteration", "stage", "cutoff_hz", "misfit"])
        it = 0
        for stage_idx, s in enumerate(result.stage_log):
            for _ in range(s.iterations):
                w.writerow([it, stage_idx, s.cutoff, f"{result.misfit_history[it]:.10e}"])
                it += 1
    depths = np.arange(true_model.grid.shape[0]) * m.dx_m
    with open(out / f"profile_col{column}.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["depth_m", "true_m_s", "initial_m_s", "inverted_m_s"])
        for r in range(true_model.grid.shape[0]):
            w.writerow([depths[r], true_model.grid[r, column],
                        start.grid[r, column], result.model.grid[r, column]])
    with open(out / "summary.json", "w", encoding="utf-8") as f:
        json.dump({
            "fullband_initial": result.fullband_initial,
            "fullband_final": result.fullband_final,
            "stages": [{"cutoff": s.cutoff, "iterations": s.iterations,
                        "start_misfit": s.start_misfit, "end_misfit": s.end_misfit,
                        "status": s.status} for s in result.stage_log],
        }, f, indent=1)
    figures.save_velocity_figure(result.model.grid, out / "inverted_model.png", m.dx_m,
                                 title="inverted model")
    figures.save_misfit_figure(result.misfit_history,
                               [s.iterations for s in result.stage_log],
                               [s.cutoff for s in result.stage_log], out / "misfit.png")
    figures.save_profile_figure(depths, {
        "true": true_model.grid[:, column],
        "initial": start.grid[:, column],
        "inverted": result.model.grid[:, column],
    }, out / f"profile_col{column}.png", title=f"column {column}")
    _echo_config(out, "fwi", {
        "obs": str(obs_dir), "out": str(out), "model_index": model_index,
        "sigma": sigma, "cutoffs": list(cutoffs), "iters": iters, "column": column,
    })
    print(f"fwi: fullband misfit {result.fullband_initial:.4e} -> {result.fullband_final:.4e} "
          f"({len(result.misfit_history)} accepted iterations) -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    cfg_file = _load_config(args.config)
    pred_dir = Path(_pick(args.pred, cfg_file, "pred", None) or _fail("missing --pred"))
    target_dir = Path(_pick(args.target, cfg_file, "target", None) or _fail("missing --target"))
    report_path = Path(_pick(args.report, cfg_file, "report", None) or _fail("missing --report"))

    preds_ds = dataio.read_dataset(pred_dir)
    targets_ds = dataio.read_dataset(target_dir)
    if len(preds_ds) != len(targets_ds):
        raise ParameterError(f"prediction count {len(preds_ds)} != target count {len(targets_ds)}")
    preds = [preds_ds.model(i) for i in range(len(preds_ds))]
    targets = [targets_ds.model(i) for i in range(len(targets_ds))]
    report = metrics.evaluate_batch(preds, targets)

    report_path.parent.mkdir(parents=True, exist_ok=True)
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=1)
    csv_path = report_path.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["subgroup", "l1", "l2", "ssim", "mssim"])
        w.writerow(["overall"] + [f"{report.overall[k]:.8e}" for k in ("l1", "l2", "ssim", "mssim")])
        for name, row in report.subgroups.items():
            w.writerow([name] + [f"{row[k]:.8e}" for k in ("l1", "l2", "ssim", "mssim")])
    figures.save_report_figure(report.to_dict(), report_path.with_suffix(".png"))
    _echo_sibling(report_path, "evaluate", {
        "pred": str(pred_dir), "target": str(target_dir), "report": str(report_path),
    })
    print(f"evaluate: n={report.n_samples} l1={report.overall['l1']:.6f} "
          f"ssim={report.overall['ssim']:.6f} -> {report_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def cmd_export_profile(args) -> int:
    cfg_file = _load_config(args.config)
    dataset_dir = Path(_pick(args.dataset, cfg_file, "dataset", None) or _fail("missing --dataset"))
    out = Path(_pick(args.out, cfg_file, "out", None) or _fail("missing --out"))
    index = int(_pick(args.model, cfg_file, "model", 0))
    column = int(_pick(args.column, cfg_file, "column", 50))

    ds = dataio.read_dataset(dataset_dir)
    if not (0 <= index < len(ds)):
        raise ParameterError(f"model index {index} outside [0, {len(ds)})")
    grid = ds.model_grid(index)
    if not (0 <= column < grid.shape[1]):
        raise ParameterError(f"column {column} outside [0, {grid.shape[1]})")
    out.mkdir(parents=True, exist_ok=True)
    depths = np.arange(grid.shape[0]) * ds.manifest.dx_m
    csv_path = out / f"profile_model{index}_col{column}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["depth_m", "velocity_m_s"])
        for r in range(grid.shape[0]):
            w.writerow([depths[r], grid[r, column]])
    figures.save_profile_figure(depths, {"velocity": grid[:, column]},
                                csv_path.with_suffix(".png"),
                                title=f"model {index}, column {column}")
    _echo_config(out, "export-profile", {
        "dataset": str(dataset_dir), "out": str(out), "model": index, "column": column,
    })
    print(f"profile -> {csv_path}")
    return EXIT_OK


def cmd_export_gather(args) -> int:
    cfg_file = _load_config(args.config)
    dataset_dir = Path(_pick(args.dataset, cfg_file, "dataset", None) or _fail("missing --dataset"))
    out = Path(_pick(args.out, cfg_file, "out", None) or _fail("missing --out"))
    index = int(_pick(args.model, cfg_file, "model", 0))
    shot = int(_pick(args.shot, cfg_file, "shot", 0))

    ds = dataio.read_dataset(dataset_dir)
    if not ds.has_records:
        raise ParameterError("dataset has no seismic records")
    if not (0 <= index < len(ds)):
        raise ParameterError(f"model index {index} outside [0, {len(ds)})")
    record = ds.record(index)
    if not (0 <= shot < record.shape[0]):
        raise ParameterError(f"shot {shot} outside [0, {record.shape[0]})")
    out.mkdir(parents=True, exist_ok=True)
    traces = record[shot]
    csv_path = out / f"gather_model{index}_shot{shot}.csv"
    np.savetxt(csv_path, traces, delimiter=",", fmt="%.8e")
    figures.save_gather_figure(traces, csv_path.with_suffix(".png"), ds.manifest.dt_s,
                               title=f"model {index}, shot {shot}")
    _echo_config(out, "export-gather", {
        "dataset": str(dataset_dir), "out": str(out), "model": index, "shot": shot,
    })
    print(f"gather -> {csv_path}")
    return EXIT_OK


def _fail(msg: str):
    raise ParameterError(msg)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="svinv",
                                description="Synthetic seismic velocity-inversion benchmark toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--seed", type=int, help="random seed (fallback: SVINV_SEED env, then 0)")
        sp.add_argument("--overwrite", action="store_true", help="replace an existing output directory")

    g = sub.add_parser("generate", help="generate stochastic velocity models")
    common(g)
    g.add_argument("--layers", help="layer-count range, e.g. 4..8 (default 4..8)")
    g.add_argument("--per-subgroup", type=int, dest="per_subgroup",
                   help="models per (layers x subtype) subgroup (default 1)")
    g.add_argument("--out", help="output dataset directory")
    g.add_argument("--jobs", type=int, help="parallel workers (default: all cores)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="forward-model shot gathers for a model dataset")
    common(s)
    s.add_argument("--models", help="input models dataset directory")
    s.add_argument("--out", help="output dataset directory")
    s.add_argument("--dt", type=float, help="time step in seconds (default 0.001)")
    s.add_argument("--dx", type=float, help="grid spacing in meters (default 7)")
    s.add_argument("--nt", type=int, help="number of time samples (default 1000)")
    s.add_argument("--freq", type=float, help="Ricker dominant frequency in Hz (default 20)")
    s.add_argument("--order", type=int, choices=(2, 4), help="spatial stencil order (default 2)")
    s.add_argument("--pad", type=int, help="absorbing pad width in cells (default 20)")
    s.add_argument("--t0", type=float, help="Ricker peak delay in seconds (default 1.5/freq)")
    s.add_argument("--precision", type=int, choices=(32, 64), help="simulation float width (default 32)")
    s.add_argument("--jobs", type=int, help="parallel workers (default: all cores)")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("add-noise", help="mix coherent and stochastic noise into records")
    common(a)
    a.add_argument("--in", dest="in_dir", help="input dataset directory (with records)")
    a.add_argument("--out", help="output dataset directory")
    a.add_argument("--mix-low", type=float, dest="mix_low", help="lowest noise/signal peak ratio (default 0.05)")
    a.add_argument("--mix-high", type=float, dest="mix_high", help="highest noise/signal peak ratio (default 0.20)")
    a.set_defaults(func=cmd_add_noise)

    sp = sub.add_parser("split", help="draw the test benchmark and nested training subsets")
    common(sp)
    sp.add_argument("--dataset", help="dataset directory")
    sp.add_argument("--test-per-subgroup", type=int, dest="test_per_subgroup")
    sp.add_argument("--train-sizes", dest="train_sizes", help="comma-separated per-subgroup sizes, e.g. 50,100,200")
    sp.add_argument("--out", help="output splits JSON path")
    sp.add_argument("--no-nest", action="store_true", dest="no_nest",
                    help="draw training levels independently instead of nested")
    sp.set_defaults(func=cmd_split)

    f = sub.add_parser("fwi", help="multiscale FWI against an observed record")
    common(f)
    f.add_argument("--obs", help="observed dataset directory (noise-free, with records)")
    f.add_argument("--model-index", type=int, dest="model_index", help="sample to invert (default 0)")
    f.add_argument("--sigma", type=float, help="Gaussian smoothing of the starting model (default 5)")
    f.add_argument("--cutoffs", help="comma-separated stage cutoffs in Hz (default 10,15,20,25,30)")
    f.add_argument("--iters", type=int, help="total iterations across stages (default 50)")
    f.add_argument("--freq", type=float, help="override the wavelet dominant frequency")
    f.add_argument("--column", type=int, help="column for the profile export (default 50)")
    f.add_argument("--out", help="output directory")
    f.set_defaults(func=cmd_fwi)

    e = sub.add_parser("evaluate", help="metric report for predictions vs targets")
    common(e)
    e.add_argument("--pred", help="prediction dataset directory")
    e.add_argument("--target", help="target dataset directory")
    e.add_argument("--report", help="output report JSON path")
    e.set_defaults(func=cmd_evaluate)

    ep = sub.add_parser("export-profile", help="velocity-vs-depth CSV and figure for one column")
    common(ep)
    ep.add_argument("--dataset", help="dataset directory")
    ep.add_argument("--model", type=int, help="model index (default 0)")
    ep.add_argument("--column", type=int, help="lateral column (default 50)")
    ep.add_argument("--out", help="output directory")
    ep.set_defaults(func=cmd_export_profile)

    eg = sub.add_parser("export-gather", help="shot-gather CSV and figure")
    common(eg)
    eg.add_argument("--dataset", help="dataset directory (with records)")
    eg.add_argument("--model", type=int, help="model index (default 0)")
    eg.add_argument("--shot", type=int, help="shot index (default 0)")
    eg.add_argument("--out", help="output directory")
    eg.set_defaults(func=cmd_export_gather)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except SimulationDivergedError as e:
        print(f"error:simulation: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ParameterError, ConfigurationError, GenerationExhaustedError,
            DatasetCorruptionError, UnsupportedVersionError, SvinvError,
            ValueError, FileNotFoundError, FileExistsError) as e:
        print(f"error:validation: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
