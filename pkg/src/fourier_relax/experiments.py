"""Scenario registry, batch runner and the studies built on top of it.

A scenario fixes the equation, grid, step, tableau, conservation policy,
initial data and error reference.  Each has a short ``ci`` span used by the
tests and a ``full`` span for long runs.  ``run_scenario`` produces rows of
``t, mass_rel_drift, momentum_rel_drift, energy_rel_drift, l2_error, gamma``
and can write them as CSV (plus a JSON sidecar with run metadata) or JSON.
"""

from __future__ import annotations

import cmath
import csv
import dataclasses
import hashlib
import json
import logging
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import solutions as sol
from .conservation import (
    MODES,
    ConservationPolicy,
    DegenerateProjectionError,
    ProjectionFailure,
    RelaxationFailure,
    _MODE_ALIASES,
)
from .integrators import integrate
from .models import MODELS, HypNLS, StageSolverSingularError, initial_state, make_model
from .spectral import SpectralGrid
from .tableaux import get_tableau

log = logging.getLogger(__name__)

COLUMNS = ("t", "mass_rel_drift", "momentum_rel_drift", "energy_rel_drift", "l2_error", "gamma")
REFERENCES = ("closed-form", "fine-reference", "none")


class IntegrationFailure(RuntimeError):
    """A run stopped early.

    ``step`` is the 1-based index of the step that failed, ``t`` the time of the
    last good state and ``snapshot`` the ``.npy`` file holding it.
    """

    def __init__(self, scenario: str, step: int, t: float, snapshot: Path, cause: Exception):
        super().__init__(f"{scenario}: integration failed at step {step} (t={t:.6g}): {cause}; last state saved to {snapshot}")
        self.scenario = scenario
        self.step = step
        self.t = t
        self.snapshot = snapshot
        self.cause = cause


# initial data ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitialData:
    """Nodal initial values and, when known, the exact solution on a given domain."""

    values: Callable[[np.ndarray], object]
    exact: Callable[[float, np.ndarray], object] | None = None


def _bbm_two_wave(length):
    return InitialData(sol.bbm_two_wave)


def _bbm_solitary(length):
    return InitialData(
        lambda x: sol.bbm_solitary(0.0, x, -20.0, 1.3, length),
        lambda t, x: sol.bbm_solitary(t, x, -20.0, 1.3, length),
    )


def _bbm_s5(length):
    c = sol.BBM_S5_SPEED
    return InitialData(sol.bbm_s5_initial, lambda t, x: sol.bbm_solitary(t, x, 0.0, c, length))


def _kdv_multi(solitons):
    def build(length):
        return InitialData(lambda x: solitons(0.0, x), solitons)

    return build


def _kdv_soliton(k, x0):
    def build(length):
        return InitialData(
            lambda x: sol.kdv_soliton(0.0, x, k, x0, length), lambda t, x: sol.kdv_soliton(t, x, k, x0, length)
        )

    return build


def _nls_sum(solitons):
    def build(length):
        return InitialData(lambda x: sol.nls_soliton_sum(x, solitons, beta=2.0))

    return build


def _nls_bright(length):
    return InitialData(lambda x: sol.nls_bright_soliton(0.0, x), sol.nls_bright_soliton)


def _gray1(length):
    g = sol.GraySoliton(length=length)
    return InitialData(lambda x: g(0.0, x), g)


def _gray2(length):
    g = sol.TwoGraySolitons(length=length)
    return InitialData(lambda x: g(-70.0, x), g)


INITIAL_DATA: dict[str, Callable[[float], InitialData]] = {
    "bbm-two-wave": _bbm_two_wave,
    "bbm-solitary": _bbm_solitary,
    "bbm-s5": _bbm_s5,
    "kdv-two-soliton": _kdv_multi(sol.KDV_TWO_SOLITON),
    "kdv-three-soliton": _kdv_multi(sol.KDV_THREE_SOLITON),
    "kdv-soliton": _kdv_soliton(0.75, -50.0),
    "kdv-soliton-slow": _kdv_soliton(0.5, 0.0),
    "nls-two-soliton": _nls_sum(sol.NLS_TWO_SOLITONS),
    "nls-three-soliton": _nls_sum(sol.NLS_THREE_SOLITONS),
    "nls-bright": _nls_bright,
    "nls-gray": _gray1,
    "nls-two-gray": _gray2,
}


# scenarios ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """One experiment; ``t_span`` is the ci span and ``full_t_span`` the long one.

    ``cadence`` is the number of steps between output rows.  ``ref_refine``
    and ``ref_substeps`` configure the fine reference when one is used.
    """

    name: str
    equation: str
    domain: tuple[float, float]
    n_nodes: int
    dt: float
    t_span: tuple[float, float]
    full_t_span: tuple[float, float] | None = None
    tableau: str = "ark5"
    conserve: str = "none"
    beta: float = 1.0
    tau: float = 1e-9
    initial: str = "kdv-two-soliton"
    reference: str = "none"
    cadence: int = 10
    ref_refine: int = 4
    ref_substeps: int = 100
    description: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.equation not in MODELS:
            raise ValueError(f"{self.name}: unknown equation {self.equation!r}")
        get_tableau(self.tableau)
        if self.conserve not in _MODE_ALIASES:
            raise ValueError(f"{self.name}: unknown conservation mode {self.conserve!r}; choose from {MODES}")
        if self.initial not in INITIAL_DATA:
            raise ValueError(f"{self.name}: unknown initial data {self.initial!r}")
        if self.reference not in REFERENCES:
            raise ValueError(f"{self.name}: reference must be one of {REFERENCES}")
        if self.reference == "closed-form" and INITIAL_DATA[self.initial](1.0).exact is None:
            raise ValueError(f"{self.name}: {self.initial!r} has no closed form")
        if not (self.dt > 0 and self.n_nodes >= 2 and self.cadence >= 1):
            raise ValueError(f"{self.name}: need dt > 0, n_nodes >= 2, cadence >= 1")
        if not self.domain[1] > self.domain[0]:
            raise ValueError(f"{self.name}: empty domain {self.domain}")
        for span in (self.t_span, self.full_t_span):
            if span is not None:
                self.steps_for(span)

    def span(self, which: str = "ci") -> tuple[float, float]:
        if which == "ci":
            return self.t_span
        if which == "full":
            return self.full_t_span or self.t_span
        raise ValueError(f"span must be 'ci' or 'full', got {which!r}")

    def steps_for(self, span: tuple[float, float]) -> int:
        n = (span[1] - span[0]) / self.dt
        if n <= 0 or abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"{self.name}: dt={self.dt} does not divide t_span {span}")
        return int(round(n))

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _scenarios() -> dict[str, Scenario]:
    gray1 = sol.GRAY1_HALF_WIDTH
    gray2 = sol.GRAY2_HALF_WIDTH
    items = [
        # semidiscrete conservation, tiny steps
        Scenario("fig1-bbm", "bbm", (-100.0, 100.0), 32, 5e-3, (0.0, 50.0), (0.0, 400.0),
                 initial="bbm-two-wave", cadence=100, description="BBM two waves, N=32"),
        Scenario("fig1-kdv", "kdv", (-200.0, 200.0), 31, 1e-2, (0.0, 10.0), (0.0, 350.0),
                 initial="kdv-two-soliton", cadence=100, description="KdV two solitons, N=31"),
        Scenario("fig1-nls", "nls", (-35.0, 35.0), 32, 1e-4, (0.0, 0.1), (0.0, 10.0), beta=2.0,
                 initial="nls-two-soliton", cadence=100, description="NLS two solitons, N=32"),
        # fully discrete conservation with large steps
        Scenario("fig2-bbm", "bbm", (-100.0, 100.0), 256, 0.5, (0.0, 500.0), (0.0, 5000.0), conserve="full",
                 initial="bbm-two-wave", description="BBM two waves with relaxation"),
        Scenario("fig2-kdv", "kdv", (-200.0, 200.0), 256, 0.1, (0.0, 100.0), (0.0, 1000.0), conserve="full",
                 initial="kdv-two-soliton", description="KdV two solitons with relaxation"),
        Scenario("fig2-nls", "nls", (-35.0, 35.0), 256, 0.01, (0.0, 10.0), (0.0, 100.0), conserve="full", beta=2.0,
                 initial="nls-two-soliton", description="NLS two solitons with relaxation"),
        # single waves, order-4 pair, mass and energy only
        Scenario("fig3-bbm", "bbm", (-100.0, 100.0), 256, 0.25, (0.0, 250.0), (0.0, 2500.0), tableau="ark4",
                 conserve="mass-energy", initial="bbm-solitary", reference="closed-form"),
        Scenario("fig3-kdv", "kdv", (-200.0, 200.0), 256, 0.05, (0.0, 50.0), (0.0, 500.0), tableau="ark4",
                 conserve="mass-energy", initial="kdv-soliton", reference="closed-form"),
        Scenario("fig3-nls", "nls", (-40.0, 40.0), 256, 0.01, (0.0, 1.0), (0.0, 5.0), tableau="ark4",
                 conserve="mass-energy", beta=2.0, initial="nls-bright", reference="closed-form",
                 description="bright soliton stands in for the externally defined single soliton"),
        # error growth
        Scenario("fig4-kdv2", "kdv", (-200.0, 200.0), 1024, 0.1, (0.0, 350.0), (0.0, 350.0), conserve="full",
                 initial="kdv-two-soliton", reference="closed-form", description="interaction near t=320"),
        Scenario("fig4-kdv3", "kdv", (-400.0, 400.0), 2048, 0.1, (0.0, 50.0), (0.0, 800.0), conserve="full",
                 initial="kdv-three-soliton", reference="closed-form", cadence=50,
                 description="whole-line closed form; full span ends before the fastest wave reaches the boundary"),
        Scenario("fig4-nls2", "nls", (-35.0, 35.0), 512, 0.01, (0.0, 1.0), (0.0, 10.0), conserve="full", beta=2.0,
                 initial="nls-two-soliton", reference="fine-reference", ref_refine=2, ref_substeps=10),
        Scenario("fig4-nls3", "nls", (-35.0, 35.0), 1024, 1e-3, (0.0, 0.2), (0.0, 10.0), conserve="mass-energy",
                 beta=2.0, initial="nls-three-soliton", reference="fine-reference", cadence=50,
                 ref_refine=2, ref_substeps=10),
        Scenario("gray1", "nls", (-gray1, gray1), 256, 0.04, (0.0, 40.0), (0.0, 400.0), conserve="full", beta=-1.0,
                 initial="nls-gray", reference="closed-form"),
        Scenario("gray2", "nls", (-gray2, gray2), 2048, 0.04, (-70.0, 70.0), (-70.0, 70.0), conserve="full",
                 beta=-1.0, initial="nls-two-gray", reference="closed-form", cadence=25,
                 description="collision at t=0"),
        # performance cases
        Scenario("s5-bbm", "bbm", (-50.0, 50.0), 100, 0.8, (0.0, 2e4), (0.0, 2e4), conserve="mass-energy",
                 initial="bbm-s5", reference="closed-form", cadence=1250),
        Scenario("s5-nls", "nls", (-40.0, 40.0), 1024, 1 / 512, (0.0, 1.0), (0.0, 1.0), conserve="mass-energy",
                 beta=2.0, initial="nls-bright", reference="closed-form", cadence=64),
        # hyperbolized NLS
        Scenario("fig7-hypnls", "hypnls", (-40.0, 40.0), 512, 1e-3, (0.0, 1.0), (0.0, 5.0), conserve="mass-energy",
                 beta=2.0, tau=1e-9, initial="nls-bright", reference="closed-form", cadence=100,
                 description="closed form is nonperiodic; the wave reaches the boundary near t=7"),
        # temporal order under relaxation
        Scenario("order-kdv", "kdv", (-80.0, 80.0), 512, 0.1, (0.0, 0.4), conserve="full",
                 initial="kdv-soliton-slow", cadence=1, description="order study: dt halved from 0.1"),
    ]
    return {s.name: s for s in items}


SCENARIOS = _scenarios()


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}") from None


# running ---------------------------------------------------------------------------------


@dataclass
class ScenarioResult:
    scenario: Scenario
    span: tuple[float, float]
    rows: np.ndarray  # (n_rows, len(COLUMNS))
    summary: dict
    final_state: np.ndarray = field(repr=False)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, COLUMNS.index(name)]


def _rel(values, ref):
    ref = np.asarray(ref, dtype=float)
    scale = np.where(np.abs(ref) > 0, np.abs(ref), 1.0)
    return (np.asarray(values, dtype=float) - ref) / scale


def _l2(model, a, b) -> float:
    # error of the NLS fields only for the hyperbolized system
    n = 2 if isinstance(model, HypNLS) else a.shape[0]
    return float(np.sqrt(np.sum(model.grid.norm2(a[:n] - b[:n]))))


def fit_slope(t: np.ndarray, err: np.ndarray, window: tuple[float, float] | None = None) -> tuple[float, bool]:
    """Least-squares slope of ``log err`` against ``log t`` on ``window``.

    Returns ``(slope, ok)``; ``ok`` is False (and the slope NaN) for a
    degenerate window: fewer than 3 points, or nonpositive ``t`` or errors.
    """
    t, err = np.asarray(t, float), np.asarray(err, float)
    sel = np.isfinite(err)
    if window is not None:
        sel &= (t >= window[0]) & (t <= window[1])
    t, err = t[sel], err[sel]
    if t.size < 3 or np.any(t <= 0) or np.any(err <= 0) or np.ptp(np.log(t)) == 0:
        return math.nan, False
    return float(np.polyfit(np.log(t), np.log(err), 1)[0]), True


def build(scenario: Scenario):
    """Grid, model, initial state and data for a scenario."""
    grid = SpectralGrid(scenario.domain[0], scenario.domain[1], scenario.n_nodes)
    model = make_model(scenario.equation, grid, beta=scenario.beta, tau=scenario.tau)
    data = INITIAL_DATA[scenario.initial](grid.length)
    state = initial_state(model, data.values(grid.node_coords))
    return grid, model, state, data


def reference_for(scenario: Scenario, grid, model, data, t0: float):
    """Callable ``t -> reference state`` on ``grid``, or None."""
    if scenario.reference == "closed-form":
        x = grid.node_coords
        return lambda t: initial_state(model, data.exact(t, x))
    if scenario.reference == "fine-reference":
        ref = sol.FineReference(
            lambda g: make_model(scenario.equation, g, beta=scenario.beta, tau=scenario.tau),
            grid,
            data.values,
            scenario.dt,
            refine=scenario.ref_refine,
            substeps=scenario.ref_substeps,
            tableau=scenario.tableau,
            t0=t0,
        )
        return ref.at
    return None


def _snapshot(scenario: Scenario, state: np.ndarray, out_dir) -> Path:
    folder = Path(out_dir) if out_dir is not None else Path(tempfile.gettempdir())
    folder.mkdir(parents=True, exist_ok=True)
    path = folder / f"{scenario.name}-failure-state.npy"
    np.save(path, state)
    return path


def run_scenario(
    scenario: Scenario | str,
    span: str = "ci",
    out_dir: str | Path | None = None,
    fmt: str | None = None,
    policy: ConservationPolicy | None = None,
) -> ScenarioResult:
    """Integrate a scenario, logging drifts, errors at the relaxed times and gamma.

    Parameters
    ----------
    span : {"ci", "full"}
    out_dir : path, optional
        Where to write the result (``fmt`` defaults to csv) and failure snapshots.
    policy : ConservationPolicy, optional
        Overrides the scenario's mode and solver tolerances.

    Raises
    ------
    IntegrationFailure
        Relaxation, projection or stage-solve failure, or a non-finite state.
    """
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    t0, t1 = scenario.span(span)
    n_steps = scenario.steps_for((t0, t1))
    policy = policy or ConservationPolicy(scenario.conserve)
    grid, model, state, data = build(scenario)
    reference = reference_for(scenario, grid, model, data, t0)
    tableau = get_tableau(scenario.tableau)
    inv0 = np.array(model.invariants(state))

    def row(t, u, gamma):
        err = _l2(model, u, reference(t)) if reference is not None else math.nan
        return [t, *_rel(model.invariants(u), inv0), err, gamma]

    rows = [row(t0, state, 1.0)]
    gammas, iters = [], []
    last_good, last_t, done = state, t0, 0
    start = time.perf_counter()
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            for t, u, rec in integrate(model, state, tableau, scenario.dt, n_steps, policy, t0=t0):
                if not cmath.isfinite(u.sum()):
                    raise FloatingPointError("non-finite state")
                done += 1
                gammas.append(rec.gamma)
                iters.append(rec.iterations)
                if done % scenario.cadence == 0 or done == n_steps:
                    rows.append(row(t, u, rec.gamma))
                last_good, last_t = u, t
    except (RelaxationFailure, ProjectionFailure, DegenerateProjectionError, StageSolverSingularError,
            FloatingPointError) as exc:
        path = _snapshot(scenario, last_good, out_dir)
        raise IntegrationFailure(scenario.name, done + 1, last_t, path, exc) from exc
    wall = time.perf_counter() - start
    table = np.array(rows)
    elapsed = table[:, 0] - t0
    slope, ok = fit_slope(elapsed, table[:, 4], (0.5 * (t1 - t0), t1 - t0))
    gammas = np.array(gammas)
    summary = {
        "max_mass_drift": float(np.max(np.abs(table[:, 1]))),
        "max_momentum_drift": float(np.max(np.abs(table[:, 2]))),
        "max_energy_drift": float(np.max(np.abs(table[:, 3]))),
        "final_l2_error": float(table[-1, 4]),
        "error_slope_second_half": slope,
        "slope_window_ok": ok,
        "wall_time": wall,
        "steps": n_steps,
        "t_final": float(table[-1, 0]),
        "gamma_min": float(gammas.min()),
        "gamma_max": float(gammas.max()),
        "root_iterations_mean": float(np.mean(iters)),
        "root_iterations_max": int(np.max(iters)),
    }
    result = ScenarioResult(scenario, (t0, t1), table, summary, last_good)
    if out_dir is not None:
        write_result(result, out_dir, fmt or "csv", policy)
    return result


def clean_json(obj):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_json(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_result(result: ScenarioResult, out_dir, fmt: str = "csv", policy: ConservationPolicy | None = None) -> Path:
    """CSV rows plus a JSON sidecar, or a single JSON document."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sc = result.scenario
    policy = policy or ConservationPolicy(sc.conserve)
    meta = {
        "scenario": sc.to_dict(),
        "scenario_hash": sc.digest(),
        "span": list(result.span),
        "tableau": get_tableau(sc.tableau).name,
        "policy": dataclasses.asdict(policy),
        "columns": list(COLUMNS),
        "summary": result.summary,
    }
    if fmt == "json":
        path = out / f"{sc.name}.json"
        meta["rows"] = [[float(v) for v in r] for r in result.rows]
        path.write_text(json.dumps(clean_json(meta), indent=1, default=repr))
        return path
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    path = out / f"{sc.name}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in result.rows:
            w.writerow([repr(float(v)) for v in r])
    (out / f"{sc.name}.json").write_text(json.dumps(clean_json(meta), indent=1, default=repr))
    return path


# studies -------------------------------------------------------------------------------------


@dataclass
class GrowthStudy:
    scenario: str
    window: tuple[float, float]
    slopes: dict[str, float]
    flags: dict[str, bool]
    results: dict[str, ScenarioResult] = field(repr=False)


def error_growth_study(
    scenario: Scenario | str,
    policies: Sequence[str] = ("none", "mass-energy", "full"),
    window: tuple[float, float] | None = None,
    span: str = "ci",
) -> GrowthStudy:
    """Log-log slope of the error against elapsed time for each policy.

    ``window`` is in elapsed time since the start of the span; by default
    the second half.  Degenerate windows are flagged (``flags[p]`` False).
    """
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    t0, t1 = scenario.span(span)
    window = window or (0.5 * (t1 - t0), t1 - t0)
    slopes, flags, results = {}, {}, {}
    for p in policies:
        res = run_scenario(scenario.replace(conserve=p), span)
        slopes[p], flags[p] = fit_slope(res.column("t") - t0, res.column("l2_error"), window)
        if not flags[p]:
            log.warning("%s/%s: degenerate fit window %s", scenario.name, p, window)
        results[p] = res
    return GrowthStudy(scenario.name, window, slopes, flags, results)


@dataclass
class OrderStudy:
    dts: list[float]
    errors: list[float]
    gamma_deviation: list[float]
    t_final: list[float]

    @property
    def orders(self) -> np.ndarray:
        e = np.array(self.errors)
        return np.log(e[:-1] / e[1:]) / np.log(np.array(self.dts[:-1]) / np.array(self.dts[1:]))

    @property
    def fitted_order(self) -> float:
        return float(np.polyfit(np.log(self.dts), np.log(self.errors), 1)[0])

    def gamma_slope(self) -> tuple[float, bool]:
        """Log-log slope of ``max |gamma - 1|`` against dt; not ok if any deviation is zero."""
        g = np.array(self.gamma_deviation)
        if np.any(g <= 0) or len(g) < 2:
            return math.nan, False
        return float(np.polyfit(np.log(self.dts), np.log(g), 1)[0]), True


def order_study(scenario: Scenario | str, dts: Sequence[float], span: str = "ci", refine: int = 2,
                substeps: int = 64) -> OrderStudy:
    """Errors at the relaxed final times against a fine reference, one run per dt.

    The reference uses ``refine`` times the nodes and ``min(dts) / substeps``.
    """
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    t0, t1 = scenario.span(span)
    grid, model, state, data = build(scenario)
    ref = sol.FineReference(
        lambda g: make_model(scenario.equation, g, beta=scenario.beta, tau=scenario.tau),
        grid, data.values, min(dts), refine=refine, substeps=substeps, tableau=scenario.tableau, t0=t0,
    )
    policy = ConservationPolicy(scenario.conserve)
    tableau = get_tableau(scenario.tableau)
    errors, gdev, tf = [], [], []
    for dt in dts:
        n = scenario.replace(dt=dt).steps_for((t0, t1))
        worst, t, u = 0.0, t0, state
        for t, u, rec in integrate(model, state, tableau, dt, n, policy, t0=t0):
            worst = max(worst, abs(rec.gamma - 1.0))
        errors.append(_l2(model, u, ref.at(t)))
        gdev.append(worst)
        tf.append(t)
    return OrderStudy(list(dts), errors, gdev, tf)


@dataclass
class BenchReport:
    case: str
    times: list[float]
    median: float
    steps: int
    final_error: float
    metadata: dict


BENCH_CASES = {
    "bbm-s5": ("s5-bbm", {"reference_runtime_s": 0.40, "comparison_runtime_s": 1141.0}),
    "nls-s5": ("s5-nls", {"reference_runtime_s": 0.36, "comparison_runtime_s": 90.0, "comparison_error": 1.26e-6}),
}


def perf_bench(case: str, repeats: int = 3, warmup: bool = True) -> BenchReport:
    """Median wall-clock of ``repeats`` runs after a short warmup run."""
    if case not in BENCH_CASES:
        raise KeyError(f"unknown bench case {case!r}; known: {sorted(BENCH_CASES)}")
    name, meta = BENCH_CASES[case]
    sc = get_scenario(name)
    # rows only at the end so timing is not dominated by diagnostics
    n = sc.steps_for(sc.t_span)
    sc = sc.replace(cadence=n)
    if warmup:
        run_scenario(sc.replace(t_span=(sc.t_span[0], sc.t_span[0] + 10 * sc.dt), cadence=10))
    times, res = [], None
    for _ in range(max(1, repeats)):
        res = run_scenario(sc)
        times.append(res.summary["wall_time"])
    meta = dict(meta, dt=sc.dt, n_nodes=sc.n_nodes, conserve=sc.conserve, tableau=sc.tableau)
    return BenchReport(case, times, float(np.median(times)), n, res.summary["final_l2_error"], meta)


@dataclass
class HyperbolizationReport:
    tau: float
    mass_drift: float
    momentum_drift: float
    energy_drift: float
    deviation: float
    error: float


def hyperbolization_study(taus: Iterable[float] = (1e-9,), span: str = "ci") -> list[HyperbolizationReport]:
    """Hyperbolized NLS with mass-energy relaxation against NLS from the same data."""
    base = get_scenario("fig7-hypnls")
    nls = run_scenario(base.replace(equation="nls", name="fig7-nls"), span)
    out = []
    for tau in taus:
        res = run_scenario(base.replace(tau=tau), span)
        model = make_model("nls", SpectralGrid(*base.domain, base.n_nodes), beta=base.beta)
        dev = _l2(model, res.final_state[:2], nls.final_state)
        s = res.summary
        out.append(HyperbolizationReport(tau, s["max_mass_drift"], s["max_momentum_drift"], s["max_energy_drift"], dev,
                                         s["final_l2_error"]))
    return out
