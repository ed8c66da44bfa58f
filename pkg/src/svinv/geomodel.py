"""Stochastic synthesis of layered, faulted, and salt-dome velocity models.

Models are 100x100 grids of acoustic velocities (m/s), row 0 at the surface.
Layered models are built top-down with the cumulative layer-filling scheme:
interface curves accumulate downward so that adjacent interfaces share shape,
sedimentary velocities increase with depth, and adjacent layers differ by at
least 200 m/s. Fault models displace the hanging wall of a layered parent
along a straight fault trace; salt models carve a high-velocity dome out of
the model base from a sum of Gaussian bumps and lift the overburden with a
set of wider Gaussians.

All randomness flows through an explicit ``numpy.random.Generator``; suite
generation derives one child stream per sample so results do not depend on
scheduling order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, GenerationExhaustedError, ParameterError

GRID = 100
SEDIMENT_V_MIN = 1500.0
SEDIMENT_V_MAX = 4000.0
MODEL_V_MAX = 4550.0
MIN_CONTRAST = 200.0
SALT_V_RANGE = (4350.0, 4550.0)

CATEGORIES = ("layered", "fault", "salt")
LAYER_RANGE = (4, 8)


# ---------------------------------------------------------------------------
# Interface curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterfaceCurve:
    """Integer depth offsets per lateral grid column."""

    samples: np.ndarray          # (GRID,) int
    family_id: str
    params: tuple[float, ...]

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=int)
        if s.shape != (GRID,):
            raise ParameterError(f"interface curve must have length {GRID}, got {s.shape}")
        if np.any(np.abs(s) >= GRID):
            raise ParameterError("interface offsets must stay below the model height")
        object.__setattr__(self, "samples", s)


def _curve_trig_product(x: np.ndarray, p: Sequence[float]) -> np.ndarray:
    a, b, c, d, e, f = p
    return a * np.sqrt(x) + b * np.log(c * x + 1.0) * np.sin(d * x) * np.cos(e * x + f)


def _curve_poly_trig(x: np.ndarray, p: Sequence[float]) -> np.ndarray:
    a, b, c, d, e, f, g = p
    return a * x**2 + b * np.sin(c * x + d) + e * (x + f) + g * x


def _curve_exp_rational(x: np.ndarray, p: Sequence[float]) -> np.ndarray:
    a, b, c, d, e, f, g = p
    return a * np.exp(b * x + c) + d * np.sin(x + e) + f * x / (x + g)


def _curve_flat(x: np.ndarray, p: Sequence[float]) -> np.ndarray:
    return np.zeros_like(x)


_KINDS: dict[str, Callable[[np.ndarray, Sequence[float]], np.ndarray]] = {
    "flat": _curve_flat,
    "trig_product": _curve_trig_product,
    "poly_trig": _curve_poly_trig,
    "exp_rational": _curve_exp_rational,
}

# Published coefficient sets for the three base families.
_BASE_ENTRIES: dict[str, tuple[str, tuple[float, ...]]] = {
    "flat": ("flat", ()),
    "l1": ("trig_product", (1.0, 5.0, 15.0, 0.14, 0.3, 20.0)),
    "l2": ("poly_trig", (0.09, -3.6, 0.6, 2.0, 5.0, 1.5, -0.8)),
    "l3": ("exp_rational", (1.0, 0.1, -0.11, -1.5, -6.0, 2.1, 3.0)),
}


@dataclass(frozen=True)
class CurveFamily:
    family_id: str
    kind: str
    params: tuple[float, ...]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return _KINDS[self.kind](x, self.params)


def _variant_params(kind: str, rng: np.random.Generator) -> tuple[float, ...]:
    u = rng.uniform
    if kind == "trig_product":
        return (u(0.0, 2.0), u(2.0, 8.0), u(5.0, 25.0), u(0.05, 0.3), u(0.1, 0.6), u(0.0, 2 * math.pi))
    if kind == "poly_trig":
        return (u(-0.12, 0.12), u(-5.0, 5.0), u(0.2, 1.0), u(0.0, 2 * math.pi), u(-6.0, 6.0), u(-2.0, 2.0), u(-2.0, 2.0))
    if kind == "exp_rational":
        return (u(0.5, 1.5) * rng.choice([-1.0, 1.0]), u(-0.12, 0.12), u(-0.2, 0.2), u(-3.0, 3.0), u(0.0, 2 * math.pi), u(-3.0, 3.0), u(2.0, 6.0))
    raise ConfigurationError(f"unknown curve kind {kind!r}")


def build_registry(n_variants_per_kind: int = 40, seed: int = 0) -> dict[str, CurveFamily]:
    """Data-driven registry of (family, coefficient-set) entries.

    Contains the flat family, the three published coefficient sets, and
    ``n_variants_per_kind`` randomized-coefficient variants of each of the
    three parametric kinds. The default sizing yields 124 entries.
    """
    registry: dict[str, CurveFamily] = {}
    for fid, (kind, params) in _BASE_ENTRIES.items():
        registry[fid] = CurveFamily(fid, kind, params)
    rng = np.random.default_rng(seed)
    for base, kind in (("l1", "trig_product"), ("l2", "poly_trig"), ("l3", "exp_rational")):
        for k in range(n_variants_per_kind):
            fid = f"{base}_v{k:03d}"
            registry[fid] = CurveFamily(fid, kind, _variant_params(kind, rng))
    return registry


_DEFAULT_REGISTRY = build_registry()


def sample_interface(
    family_id: str,
    rng: np.random.Generator,
    registry: dict[str, CurveFamily] | None = None,
    amplitude_clamp: float = 15.0,
) -> InterfaceCurve:
    """Evaluate a registered curve family and quantize it to integer offsets.

    The raw curve is rescaled so its peak-to-trough span does not exceed
    ``amplitude_clamp`` grid units, then scaled by a random amplitude factor
    in [0.5, 1] and a random sign before rounding. Deterministic given
    (family_id, generator state).
    """
    reg = registry if registry is not None else _DEFAULT_REGISTRY
    try:
        fam = reg[family_id]
    except KeyError:
        raise ConfigurationError(f"unknown interface family {family_id!r}") from None
    x = np.arange(GRID, dtype=float)
    y = fam.evaluate(x)
    span = float(np.ptp(y))
    if span > amplitude_clamp:
        y = y * (amplitude_clamp / span)
    y = y * rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
    # Offset-dominated curves would violate |sample| < GRID; recenter them.
    if np.max(np.abs(y)) > GRID / 2:
        y = y - np.round(np.mean(y))
    return InterfaceCurve(np.rint(y).astype(int), family_id, fam.params)


# ---------------------------------------------------------------------------
# Model types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LayerSpec:
    """One sedimentary layer: velocity (m/s), nominal thickness (grid units)
    and the interface curve of its lower boundary."""

    velocity: float
    thickness: int
    interface: InterfaceCurve

    def __post_init__(self):
        if self.thickness < 1:
            raise ParameterError("layer thickness must be at least 1 grid unit")


@dataclass(frozen=True)
class FaultParams:
    angle: float                 # degrees from horizontal
    kind: str                    # "normal" | "reverse"
    throw: int                   # grid units
    pivot: int                   # lateral grid column of the trace at the surface

    def __post_init__(self):
        if self.kind not in ("normal", "reverse"):
            raise ParameterError(f"fault kind must be normal or reverse, got {self.kind!r}")
        if self.throw < 1:
            raise ParameterError("fault throw must be at least 1 grid unit")
        if not (0.0 < self.angle <= 90.0):
            raise ParameterError("fault angle must lie in (0, 90] degrees")


@dataclass(frozen=True)
class SaltParams:
    gaussians: tuple[tuple[float, float, float], ...]   # (amplitude, center_x, width)
    dome_velocity: float
    deformation_widths: tuple[float, ...]               # widths of the broader lift Gaussians
    deformation_scale: float = 0.4

    def __post_init__(self):
        if len(self.gaussians) < 4:
            raise ParameterError("salt dome needs at least four Gaussian components")
        if len(self.deformation_widths) != len(self.gaussians):
            raise ParameterError("one deformation width per dome Gaussian is required")
        lo, hi = SALT_V_RANGE
        if not (lo <= self.dome_velocity <= hi):
            raise ParameterError(f"dome velocity must lie in [{lo}, {hi}] m/s")


@dataclass
class VelocityModel:
    """A 100x100 velocity field with its generation metadata.

    ``layers`` holds the LayerSpecs of the (pre-deformation) layered parent,
    which makes the construction re-simulatable for validation. Models read
    back from disk carry an empty layer list.
    """

    grid: np.ndarray             # (GRID, GRID) float, m/s; row = depth
    category: str                # layered | fault | salt
    n_layers: int
    seed: int
    layers: tuple[LayerSpec, ...] = ()
    fault_meta: FaultParams | None = None
    salt_meta: SaltParams | None = None
    sample_id: int | None = None

    def copy_with_grid(self, grid: np.ndarray) -> "VelocityModel":
        return replace(self, grid=grid)


# ---------------------------------------------------------------------------
# Layered construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    thickness_range: tuple[int, int] = (6, 25)
    amplitude_clamp: float = 15.0
    retry_cap: int = 100
    fault_angle_range: tuple[float, float] = (45.0, 90.0)
    fault_throw_range: tuple[int, int] = (3, 12)
    fault_pivot_range: tuple[int, int] = (20, 80)
    salt_height_range: tuple[float, float] = (20.0, 50.0)
    salt_n_gaussians_range: tuple[int, int] = (4, 6)
    salt_width_range: tuple[float, float] = (4.0, 12.0)
    deformation_width_factor_range: tuple[float, float] = (2.0, 3.0)
    deformation_scale: float = 0.4
    registry: dict[str, CurveFamily] = field(default_factory=lambda: _DEFAULT_REGISTRY)


def _draw_velocities(n_layers: int, rng: np.random.Generator) -> np.ndarray:
    """Increasing sedimentary velocities with pairwise gaps >= MIN_CONTRAST."""
    slack = (SEDIMENT_V_MAX - SEDIMENT_V_MIN) - MIN_CONTRAST * (n_layers - 1)
    offsets = np.sort(rng.uniform(0.0, slack, size=n_layers))
    return SEDIMENT_V_MIN + MIN_CONTRAST * np.arange(n_layers) + offsets


def fill_layers(layers: Sequence[LayerSpec]) -> np.ndarray:
    """Grid produced by the cumulative top-down layer filling scheme.

    Per column c, layer i occupies rows [d_prev + L_prev[c],
    d_prev + L_prev[c] + d_i + L_i[c]); the final layer extends to the
    bottom of the grid.
    """
    grid = np.full((GRID, GRID), np.nan)
    rows = np.arange(GRID)[:, None]
    d_prev = 0
    l_prev = np.zeros(GRID, dtype=int)
    for i, layer in enumerate(layers):
        start = d_prev + l_prev
        if i == len(layers) - 1:
            end = np.full(GRID, GRID, dtype=int)
        else:
            end = start + layer.thickness + layer.interface.samples
        mask = (rows >= start[None, :]) & (rows < end[None, :])
        grid[mask] = layer.velocity
        d_prev += layer.thickness
        l_prev = l_prev + layer.interface.samples
    if np.isnan(grid).any():
        raise GenerationExhaustedError("layer stack does not cover the grid")
    return grid


def build_layered_model(
    n_layers: int,
    rng: np.random.Generator,
    cfg: GeneratorConfig | None = None,
    seed: int = -1,
) -> VelocityModel:
    """Draw a layered model satisfying all velocity-model invariants.

    Redraws the full layer stack when the cumulative interfaces push the
    deepest layer below the grid, up to ``cfg.retry_cap`` attempts.
    """
    cfg = cfg or GeneratorConfig()
    if not (LAYER_RANGE[0] <= n_layers <= LAYER_RANGE[1]):
        raise ParameterError(f"n_layers must lie in [{LAYER_RANGE[0]}, {LAYER_RANGE[1]}], got {n_layers}")
    family_ids = sorted(cfg.registry)
    t_lo, t_hi = cfg.thickness_range
    # Cap the per-layer thickness so the expected stack fits the grid; the
    # configured range applies whenever the layer count permits it.
    t_hi = max(t_lo, min(t_hi, (GRID - 10) // n_layers))
    for _ in range(cfg.retry_cap):
        velocities = _draw_velocities(n_layers, rng)
        layers: list[LayerSpec] = []
        feasible = True
        for i in range(n_layers):
            for _ in range(cfg.retry_cap):
                fid = family_ids[rng.integers(0, len(family_ids))]
                curve = sample_interface(fid, rng, cfg.registry, cfg.amplitude_clamp)
                thickness = int(rng.integers(t_lo, t_hi + 1))
                if thickness + int(curve.samples.min()) >= 1:
                    break
            else:
                feasible = False
                break
            layers.append(LayerSpec(velocities[i], thickness, curve))
        if not feasible:
            continue
        # The last layer must surface in every column: its start row is the
        # cumulative depth of everything above it.
        start_last = sum(l.thickness for l in layers[:-1]) + np.sum(
            [l.interface.samples for l in layers[:-1]], axis=0
        )
        if np.max(start_last) > GRID - 1 or np.min(start_last) < 1:
            continue
        grid = fill_layers(layers)
        return VelocityModel(grid, "layered", n_layers, seed, tuple(layers))
    raise GenerationExhaustedError(
        f"could not fit {n_layers} layers within the grid after {cfg.retry_cap} attempts"
    )


# ---------------------------------------------------------------------------
# Structural deformations
# ---------------------------------------------------------------------------

def _fault_shift(grid: np.ndarray, params: FaultParams) -> np.ndarray:
    """Shift hanging-wall cells vertically; vacated cells extend the nearest
    surviving cell in the same column."""
    nz, nx = grid.shape
    rows = np.arange(nz)[:, None]
    cols = np.arange(nx)[None, :]
    cot = 0.0 if params.angle == 90.0 else 1.0 / math.tan(math.radians(params.angle))
    trace = params.pivot + rows * cot
    hanging = cols > trace
    shift = params.throw if params.kind == "normal" else -params.throw
    src_rows = np.clip(np.arange(nz) - shift, 0, nz - 1)
    shifted = grid[src_rows, :]
    return np.where(hanging, shifted, grid)


def apply_fault(model: VelocityModel, params: FaultParams) -> VelocityModel:
    """Displace the hanging wall of a layered model along the fault trace.

    Normal faults move the hanging wall down, reverse faults up.
    """
    if model.category != "layered":
        raise ParameterError("faults are applied to layered parents only")
    if params.throw >= model.grid.shape[0]:
        raise ParameterError("fault throw must be smaller than the model height")
    grid = _fault_shift(model.grid, params)
    return replace(model, grid=grid, category="fault", fault_meta=params)


def salt_envelope(params: SaltParams, width: int = GRID) -> np.ndarray:
    """Height of the dome above the model base, per column."""
    c = np.arange(width, dtype=float)
    h = np.zeros(width)
    for amp, cx, w in params.gaussians:
        h += amp * np.exp(-((c - cx) ** 2) / (2.0 * w**2))
    return h


def salt_deformation(params: SaltParams, width: int = GRID) -> np.ndarray:
    """Upward lift applied to the overburden, per column (wider Gaussians)."""
    c = np.arange(width, dtype=float)
    d = np.zeros(width)
    for (amp, cx, _), w_def in zip(params.gaussians, params.deformation_widths):
        d += amp * np.exp(-((c - cx) ** 2) / (2.0 * w_def**2))
    return params.deformation_scale * d


def insert_salt_dome(model: VelocityModel, params: SaltParams) -> VelocityModel:
    """Carve a salt dome rising from the model base and lift the overburden.

    The dome region is the set of cells below the summed-Gaussian envelope
    anchored at the base; cells above it are remapped upward with a lift
    that tapers to zero at the surface so shallow structure survives.
    """
    if model.category != "layered":
        raise ParameterError("salt domes are applied to layered parents only")
    nz, nx = model.grid.shape
    h = salt_envelope(params, nx)
    dome_top = nz - h                                  # fractional row of the dome boundary
    dome_mask = np.arange(nz)[:, None] >= dome_top[None, :]
    if not dome_mask.any():
        raise ParameterError("salt dome parameters produce an empty dome region")
    lift = salt_deformation(params, nx)
    rows = np.arange(nz)[:, None].astype(float)
    denom = np.maximum(dome_top, 1.0)[None, :]
    shift = np.rint(lift[None, :] * rows / denom).astype(int)
    src = np.clip(np.arange(nz)[:, None] + shift, 0, nz - 1)
    grid = np.take_along_axis(model.grid, src, axis=0)
    grid[dome_mask] = params.dome_velocity
    return replace(model, grid=grid, category="salt", salt_meta=params)


# ---------------------------------------------------------------------------
# Structure parameter draws and suite generation
# ---------------------------------------------------------------------------

def draw_fault_params(rng: np.random.Generator, cfg: GeneratorConfig) -> FaultParams:
    return FaultParams(
        angle=float(rng.uniform(*cfg.fault_angle_range)),
        kind="normal" if rng.random() < 0.5 else "reverse",
        throw=int(rng.integers(cfg.fault_throw_range[0], cfg.fault_throw_range[1] + 1)),
        pivot=int(rng.integers(cfg.fault_pivot_range[0], cfg.fault_pivot_range[1] + 1)),
    )


def draw_salt_params(rng: np.random.Generator, cfg: GeneratorConfig) -> SaltParams:
    n_g = int(rng.integers(cfg.salt_n_gaussians_range[0], cfg.salt_n_gaussians_range[1] + 1))
    main = rng.uniform(25.0, 75.0)
    centers = main + rng.uniform(-12.0, 12.0, size=n_g)
    widths = rng.uniform(*cfg.salt_width_range, size=n_g)
    amps = rng.uniform(0.5, 1.0, size=n_g)
    target = rng.uniform(*cfg.salt_height_range)
    probe = SaltParams(
        tuple(zip(amps, centers, widths)), SALT_V_RANGE[0], tuple(widths), cfg.deformation_scale
    )
    peak = float(salt_envelope(probe).max())
    amps = amps * (target / peak)
    factors = rng.uniform(*cfg.deformation_width_factor_range, size=n_g)
    return SaltParams(
        gaussians=tuple((float(a), float(c), float(w)) for a, c, w in zip(amps, centers, widths)),
        dome_velocity=float(rng.uniform(*SALT_V_RANGE)),
        deformation_widths=tuple(float(w * f) for w, f in zip(widths, factors)),
        deformation_scale=cfg.deformation_scale,
    )


def subgroup_list() -> list[tuple[int, str]]:
    """The 15 (n_layers, subtype) subgroups in canonical order."""
    return [(n, cat) for n in range(LAYER_RANGE[0], LAYER_RANGE[1] + 1) for cat in CATEGORIES]


def sample_seed_for(suite_seed: int, index: int) -> int:
    """Per-sample 64-bit seed derived from the suite seed and sample index."""
    return int(np.random.SeedSequence((suite_seed, index)).generate_state(1, np.uint64)[0])


def generate_one(
    n_layers: int,
    subtype: str,
    sample_seed: int,
    cfg: GeneratorConfig | None = None,
) -> VelocityModel:
    cfg = cfg or GeneratorConfig()
    rng = np.random.default_rng(sample_seed)
    parent = build_layered_model(n_layers, rng, cfg, seed=sample_seed)
    if subtype == "layered":
        return parent
    if subtype == "fault":
        return apply_fault(parent, draw_fault_params(rng, cfg))
    if subtype == "salt":
        return insert_salt_dome(parent, draw_salt_params(rng, cfg))
    raise ConfigurationError(f"unknown subtype {subtype!r}")


def generate_model_suite(
    counts: int,
    seed: int,
    cfg: GeneratorConfig | None = None,
    layer_range: tuple[int, int] = LAYER_RANGE,
) -> list[VelocityModel]:
    """``counts`` models for each of the (layers x subtype) subgroups.

    Each sample derives its own PRNG stream from (seed, sample_index), so
    the suite is reproducible and order-independent.
    """
    if counts < 1:
        raise ParameterError("counts must be at least 1 per subgroup")
    cfg = cfg or GeneratorConfig()
    subgroups = [(n, cat) for n in range(layer_range[0], layer_range[1] + 1) for cat in CATEGORIES]
    models = []
    index = 0
    for n_layers, subtype in subgroups:
        for _ in range(counts):
            s = sample_seed_for(seed, index)
            m = generate_one(n_layers, subtype, s, cfg)
            m.sample_id = index
            models.append(m)
            index += 1
    return models


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckItem:
    name: str
    passed: bool
    detail: str = ""
    first_offense: tuple[int, int] | None = None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckItem, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckItem]:
        return [c for c in self.checks if not c.passed]


def _first_bad_cell(mask: np.ndarray) -> tuple[int, int] | None:
    idx = np.argwhere(mask)
    return (int(idx[0][0]), int(idx[0][1])) if len(idx) else None


def validate_model(model: VelocityModel) -> ValidationReport:
    """Report pass/fail for every velocity-model invariant.

    Monotonicity and the reconstruction check run on the pre-deformation
    layered parent for fault and salt models; checks that need the stored
    LayerSpecs are skipped (reported as passing with a note) when a model
    was loaded without them.
    """
    checks: list[CheckItem] = []
    g = np.asarray(model.grid, dtype=float)

    bad = (g < SEDIMENT_V_MIN) | (g > MODEL_V_MAX)
    checks.append(CheckItem("velocity-range", not bad.any(),
                            f"cells must lie in [{SEDIMENT_V_MIN}, {MODEL_V_MAX}] m/s",
                            _first_bad_cell(bad)))

    salt_like = g > SEDIMENT_V_MAX
    if model.category == "salt":
        bad = salt_like & ((g < SALT_V_RANGE[0]) | (g > SALT_V_RANGE[1]))
        checks.append(CheckItem("salt-range", not bad.any(),
                                "dome cells must lie in [4350, 4550] m/s",
                                _first_bad_cell(bad)))
    else:
        checks.append(CheckItem("no-salt-velocities", not salt_like.any(),
                                "non-salt models must stay within sedimentary velocities",
                                _first_bad_cell(salt_like)))

    if model.layers:
        parent = fill_layers(model.layers)
        mono_bad = np.diff(parent, axis=0) < -1e-9
        off = _first_bad_cell(mono_bad)
        off = (off[0] + 1, off[1]) if off else None
        checks.append(CheckItem("monotone-depth", not mono_bad.any(),
                                "parent velocity must be non-decreasing with depth per column", off))

        v = np.array([l.velocity for l in model.layers])
        gaps = np.diff(v)
        ok = bool(np.all(gaps >= MIN_CONTRAST - 1e-9))
        offense = None
        if not ok:
            bad_pair = int(np.argmin(gaps >= MIN_CONTRAST - 1e-9))
            offense = _first_bad_cell(parent == v[bad_pair + 1])
        checks.append(CheckItem("layer-contrast", ok,
                                f"adjacent layer velocities must differ by >= {MIN_CONTRAST} m/s "
                                f"(min gap {gaps.min():.1f})", offense))

        checks.append(CheckItem("layer-count", len(model.layers) == model.n_layers,
                                f"stored layers {len(model.layers)} vs declared {model.n_layers}"))
        if model.category == "layered":
            n_bands = len(np.unique(g))
            checks.append(CheckItem("distinct-bands", n_bands == model.n_layers,
                                    f"{n_bands} distinct velocities for {model.n_layers} layers"))

        rebuilt = parent
        if model.category == "fault" and model.fault_meta is not None:
            rebuilt = _fault_shift(parent, model.fault_meta)
        elif model.category == "salt" and model.salt_meta is not None:
            rebuilt = insert_salt_dome(
                VelocityModel(parent, "layered", model.n_layers, model.seed, model.layers),
                model.salt_meta,
            ).grid
        same = np.array_equal(rebuilt, g)
        bad_cell = None if same else _first_bad_cell(rebuilt != g)
        checks.append(CheckItem("reconstruction", same,
                                "grid must equal re-simulation from stored specs", bad_cell))
    else:
        checks.append(CheckItem("layer-specs", True, "layer specs unavailable; parent checks skipped"))
        if model.category == "layered":
            mono_bad = np.diff(g, axis=0) < -1e-9
            off = _first_bad_cell(mono_bad)
            off = (off[0] + 1, off[1]) if off else None
            checks.append(CheckItem("monotone-depth", not mono_bad.any(),
                                    "velocity must be non-decreasing with depth per column", off))

    return ValidationReport(tuple(checks))
