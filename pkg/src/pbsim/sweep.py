"""
Batch engine: parameter sweeps, optimum search, region boundaries and CSV I/O.

A run is described by one JSON document::

    {
      "name": "fig4_delta0",
      "model": "one_cavity",                # or two_cavity_reduced / two_cavity_full
      "params": {"delta": 0.0, "eps": 0.01},
      "units": {"kappa_MHz_over_2pi": 5.0, "MHz_over_2pi": {"g": 0.4}},
      "sweep": {"axis": "omega_drive", "range": [40, 120], "points": 161},
      "solver": {"h": null, "max_dim": 64},
      "outputs": ["mean_phonon", "g2", "g3", "g4", "region"],
      "family": {"param": "delta", "values": [0.0, 0.05, 0.1]}
    }

Rates are in units of kappa unless listed under ``units.MHz_over_2pi``. The
optional ``family`` expands the document into one sweep per value. A preset
file wraps several documents as ``{"name", "description", "runs": [...]}``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    BoundaryMinimumError,
    ClassificationDegenerateWarning,
    ConfigError,
    PBSimError,
    UndefinedCorrelationError,
)
from .hilbert import HilbertSpace, product_state
from .liouvillian import Liouvillian, atom_mode_channels, commutator_superop, dissipative_part
from .models import (
    OneCavityParams,
    TwoCavityParams,
    build_one_cavity_hamiltonian,
    build_two_cavity_hamiltonian_reduced,
    from_mhz_over_2pi,
    two_cavity_time_dependent,
)
from .observables import TABLE_REGIONS, CorrelationReport, correlation_report, ordering
from .solvers import evolve, evolve_periodic, period_propagator, periodic_steady_state, steady_state

log = logging.getLogger(__name__)

MODELS = {
    "one_cavity": OneCavityParams,
    "two_cavity_reduced": TwoCavityParams,
    "two_cavity_full": TwoCavityParams,
}
OUTPUTS = ("mean_phonon", "g2", "g3", "g4", "region")
CSV_HEADER = ["axis", "mean_phonon", "g2", "g3", "g4", "log10_g2", "log10_g3", "log10_g4", "region"]
THREADS_ENV = "PB_SIM_THREADS"


@dataclass(frozen=True)
class SolverOptions:
    h: float | None = None
    max_dim: int = 64


@dataclass(frozen=True)
class SweepSpec:
    model: str
    axis: str
    lo: float
    hi: float
    points: int
    fixed: OneCavityParams | TwoCavityParams
    outputs: tuple[str, ...] = OUTPUTS
    solver: SolverOptions = field(default_factory=SolverOptions)
    name: str = "sweep"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {sorted(MODELS)}")
        if not isinstance(self.fixed, MODELS[self.model]):
            raise ConfigError(f"model {self.model} needs {MODELS[self.model].__name__}")
        if self.axis not in sweepable_axes(self.model):
            raise ConfigError(f"axis {self.axis!r} is not sweepable for {self.model}")
        if not self.lo < self.hi:
            raise ConfigError(f"sweep range must satisfy lo < hi, got ({self.lo}, {self.hi})")
        if self.points < 2:
            raise ConfigError(f"need at least 2 points, got {self.points}")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise ConfigError(f"unknown outputs {sorted(bad)}")
        dim = self.fixed.space.dim
        if dim > self.solver.max_dim:
            raise ConfigError(f"Hilbert dimension {dim} exceeds the cap {self.solver.max_dim}")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


def sweepable_axes(model: str) -> set[str]:
    names = {f.name for f in fields(MODELS[model]) if f.name != "n_trunc"}
    if model != "one_cavity":
        names.add("g_prime")
    return names | {"t"}


@dataclass(frozen=True)
class ResultRow:
    axis_value: float
    mean_phonon: float
    g2: float
    g3: float
    g4: float
    region_label: str
    error: str | None = None

    @property
    def log10_g2(self) -> float:
        return _log10(self.g2)

    @property
    def log10_g3(self) -> float:
        return _log10(self.g3)

    @property
    def log10_g4(self) -> float:
        return _log10(self.g4)

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def ordering(self) -> str | None:
        return ordering(self.g2, self.g3, self.g4) if self.ok else None

    @classmethod
    def from_report(cls, x: float, rep: CorrelationReport) -> ResultRow:
        return cls(float(x), rep.mean_phonon, rep.g2, rep.g3, rep.g4, rep.region_label.value)

    @classmethod
    def failed(cls, x: float, exc: Exception) -> ResultRow:
        nan = float("nan")
        return cls(float(x), nan, nan, nan, nan, "error", f"{type(exc).__name__}: {exc}")


def _log10(x: float) -> float:
    if math.isnan(x):
        return x
    return math.log10(x) if x > 0 else float("-inf")


# ---- point evaluation -----------------------------------------------------


def params_at(spec: SweepSpec, x: float):
    if spec.axis == "t":
        return spec.fixed
    if spec.axis == "g_prime":
        return spec.fixed.with_coupling(x)
    return replace(spec.fixed, **{spec.axis: float(x)})


@lru_cache(maxsize=32)
def _dissipative_cached(space: HilbertSpace, kappa: float, gamma_m: float, n_bth: float) -> np.ndarray:
    arr = dissipative_part(space, atom_mode_channels(space, kappa, gamma_m, n_bth))
    arr.setflags(write=False)
    return arr


def _channels(p):
    return atom_mode_channels(p.space, p.kappa, p.gamma_m, p.n_bth)


def liouvillian_for(model: str, p) -> Liouvillian:
    """Generator of a static model (one_cavity or two_cavity_reduced)."""
    if model == "one_cavity":
        H = build_one_cavity_hamiltonian(p)
    elif model == "two_cavity_reduced":
        H = build_two_cavity_hamiltonian_reduced(p)
    else:
        raise ValueError(f"{model} is not a static model")
    return Liouvillian(H.space, commutator_superop(H) + _dissipative_cached(p.space, p.kappa, p.gamma_m, p.n_bth))


def steady_report(model: str, p, h: float | None = None) -> CorrelationReport:
    if model == "two_cavity_full":
        Ht = two_cavity_time_dependent(p)
        rho = periodic_steady_state(period_propagator(Ht, _channels(p), h), p.space)
    else:
        rho = steady_state(liouvillian_for(model, p))
    return correlation_report(rho, 1)


def evaluate_point(spec: SweepSpec, x: float) -> CorrelationReport:
    return steady_report(spec.model, params_at(spec, x), spec.solver.h)


def _time_rows(spec: SweepSpec) -> list[ResultRow]:
    p = spec.fixed
    rho0 = product_state(p.space, (0, 0))
    if spec.model == "two_cavity_full":
        traj = evolve_periodic(two_cavity_time_dependent(p), _channels(p), rho0, spec.grid, spec.solver.h)
    else:
        H = build_one_cavity_hamiltonian(p) if spec.model == "one_cavity" else build_two_cavity_hamiltonian_reduced(p)
        traj = evolve(H, _channels(p), rho0, spec.grid, spec.solver.h)
    rows = []
    for t, rho in zip(traj.times, traj.states):
        try:
            rows.append(ResultRow.from_report(t, correlation_report(rho, 1)))
        except UndefinedCorrelationError as exc:
            rows.append(ResultRow.failed(t, exc))
    return rows


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[ResultRow]:
    """One row per grid point, in grid order.

    Points that fail inside a solver become error rows; the sweep continues.
    A time axis runs a single trajectory from ground x vacuum instead.
    """
    if spec.axis == "t":
        return _time_rows(spec)

    def point(x):
        try:
            return ResultRow.from_report(x, evaluate_point(spec, x))
        except PBSimError as exc:
            log.info("point %s=%g failed: %s", spec.axis, x, exc)
            return ResultRow.failed(x, exc)

    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [point(x) for x in spec.grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(point, spec.grid))


# ---- optimum search -------------------------------------------------------


def golden_refine(f: Callable[[float], float], a: float, b: float, c: float, xtol: float = 1e-9) -> tuple[float, float]:
    """Golden-section search inside the bracket a < b < c with f(b) below both ends."""
    res = minimize_scalar(f, bracket=(a, b, c), method="golden", tol=xtol)
    return float(res.x), float(res.fun)


def find_optimum(
    spec: SweepSpec,
    refine: bool = True,
    objective: Callable[[float], float] | None = None,
    rows: Sequence[ResultRow] | None = None,
) -> tuple[float, float]:
    """Minimize g2 along the sweep axis.

    The coarse grid picks the bracket (ties go to the smaller axis value); a
    golden-section search then refines inside the two neighbouring cells.
    ``objective`` replaces the physics evaluation, mainly for testing.
    """
    xs = spec.grid
    if objective is not None:
        ys = np.array([objective(x) for x in xs], dtype=float)
        f = objective
    else:
        rows = run_sweep(spec) if rows is None else rows
        ys = np.array([r.g2 if r.ok else np.nan for r in rows], dtype=float)

        def f(x):
            return evaluate_point(spec, x).g2

    if np.all(np.isnan(ys)):
        raise BoundaryMinimumError("no grid point produced a value")
    i = int(np.nanargmin(ys))
    if i == 0 or i == len(xs) - 1:
        raise BoundaryMinimumError(f"minimum at the edge of the range ({spec.axis}={xs[i]:g}); widen the sweep")
    if not refine or not ys[i] < ys[i + 1]:
        return float(xs[i]), float(ys[i])
    return golden_refine(f, xs[i - 1], xs[i], xs[i + 1])


# ---- region boundaries ----------------------------------------------------


@dataclass(frozen=True)
class Boundary:
    position: float
    left: str
    right: str


def region_name(order: str) -> str:
    return TABLE_REGIONS.get(order, order)


def locate_region_boundaries(
    rows: Sequence[ResultRow],
    evaluate: Callable[[float], CorrelationReport] | None = None,
    xtol: float = 1e-4,
) -> list[Boundary]:
    """Points along a detuning sweep where the ordering of {1, g2, g3, g4} changes.

    With ``evaluate`` each change is bisected down to ``xtol``; otherwise the
    midpoint of the grid cell is reported.
    """
    good = sorted((r for r in rows if r.ok), key=lambda r: r.axis_value)
    out = []
    for left, right in zip(good[:-1], good[1:]):
        if left.ordering == right.ordering:
            continue
        a, b = left.axis_value, right.axis_value
        if evaluate is not None:
            while b - a > xtol:
                m = 0.5 * (a + b)
                rep = evaluate(m)
                if ordering(rep.g2, rep.g3, rep.g4) == left.ordering:
                    a = m
                else:
                    b = m
        out.append(Boundary(0.5 * (a + b), region_name(left.ordering), region_name(right.ordering)))
    if len({r.ordering for r in good}) < 2:
        warnings.warn("fewer than two regions found along the sweep", ClassificationDegenerateWarning, stacklevel=2)
    return out


def boundaries_for(spec: SweepSpec, rows: Sequence[ResultRow] | None = None, xtol: float = 1e-4) -> list[Boundary]:
    rows = run_sweep(spec) if rows is None else rows
    return locate_region_boundaries(rows, lambda x: evaluate_point(spec, x), xtol)


# ---- CSV ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(x, ".16e")


def emit_csv(rows: Sequence[ResultRow], path: str | Path) -> Path:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                nums = [r.axis_value, r.mean_phonon, r.g2, r.g3, r.g4, r.log10_g2, r.log10_g3, r.log10_g4]
                w.writerow([_fmt(v) for v in nums] + [r.region_label])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def read_csv(path: str | Path) -> list[ResultRow]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            x, n, g2, g3, g4 = (float(v) for v in rec[:5])
            region = rec[8]
            rows.append(ResultRow(x, n, g2, g3, g4, region, "error" if region == "error" else None))
    return rows


# ---- configuration --------------------------------------------------------

_DOC_KEYS = {"name", "description", "model", "params", "units", "sweep", "solver", "outputs", "family"}


def _build_params(model: str, raw: dict, units: dict):
    cls = MODELS[model]
    raw = dict(raw)
    kappa_mhz = float(units.get("kappa_MHz_over_2pi", 5.0))
    for key, value in units.get("MHz_over_2pi", {}).items():
        if key in raw:
            raise ConfigError(f"{key} given both in params and in units")
        raw[key] = from_mhz_over_2pi(float(value), kappa_mhz)
    g_prime = None
    if cls is TwoCavityParams:
        for key in ("sqrt_n_plus", "sqrt_n_minus"):
            if key in raw:
                raw[key[5:]] = float(raw.pop(key)) ** 2
        g_prime = raw.pop("g_prime", None)
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown parameters for {model}: {sorted(unknown)}")
    try:
        p = cls(**raw)
        return p.with_coupling(float(g_prime)) if g_prime is not None else p
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc


def spec_from_dict(doc: dict) -> list[SweepSpec]:
    """Expand one run document (possibly with a family) into sweep specs."""
    unknown = set(doc) - _DOC_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        model = doc["model"]
        sweep = doc["sweep"]
        axis = sweep["axis"]
        lo, hi = (float(v) for v in sweep["range"])
        points = int(sweep["points"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc!r}") from exc
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    solver_raw = doc.get("solver", {})
    if set(solver_raw) - {"h", "max_dim"}:
        raise ConfigError(f"unknown solver options: {sorted(set(solver_raw) - {'h', 'max_dim'})}")
    solver = SolverOptions(**solver_raw)
    outputs = tuple(doc.get("outputs", OUTPUTS))
    name = doc.get("name", "sweep")
    params = dict(doc.get("params", {}))
    units = doc.get("units", {})

    family = doc.get("family")
    if family is None:
        variants = [(name, params)]
    else:
        try:
            fparam, values = family["param"], list(family["values"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed family block: {exc!r}") from exc
        variants = [(f"{name}_{fparam}={v:g}", {**params, fparam: v}) for v in values]

    return [
        SweepSpec(model, axis, lo, hi, points, _build_params(model, p, units), outputs, solver, vname)
        for vname, p in variants
    ]


def load_config(source: str | Path | dict) -> list[SweepSpec]:
    if isinstance(source, dict):
        doc = source
    else:
        try:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {source} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "runs" in doc:
        return [s for run in doc["runs"] for s in spec_from_dict(run)]
    return spec_from_dict(doc)


def _preset_dir():
    return resources.files("pbsim") / "configs"


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in _preset_dir().iterdir() if p.name.endswith(".json"))


def preset_document(name: str) -> dict:
    res = _preset_dir() / f"{name}.json"
    if not res.is_file():
        raise ConfigError(f"no preset named {name!r}; available: {', '.join(preset_names())}")
    return json.loads(res.read_text(encoding="utf-8"))


def load_preset(name: str) -> list[SweepSpec]:
    return load_config(preset_document(name))
