"""Closed-loop simulation: plant stepping, trigger supervision, gain rescheduling.

A run advances the plant by implicit Euler, evaluates the event trigger after
every step, and on firing resamples the coefficient, re-solves the kernel,
and (in dynamic mode) resets the filter state. Event times therefore land on
the time lattice; the step is far below every observed inter-execution time.

Runs are deterministic: identical configurations and initial data reproduce
bit-identical results. Batch runs over the initial-condition family

    u0_n(x) = sqrt(2/n) sin(sqrt(n) pi x) + sqrt(n) (x - x^2),   n = 1..N

aggregate event counts and inter-execution gaps; aggregation is
order-independent, so members may be simulated concurrently.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .analysis import EventStats, event_statistics
from .backstepping import (Kernel, KernelSolveError, control_value,
                           solve_kernel_closed_form, solve_kernel_numeric)
from .numerics import Grid, Profile
from .plant import (Actuation, PlantConfig, ReactionCoefficient, SampledCoefficient,
                    make_coefficient, sample_coefficient, sampling_error,
                    validate_coefficient, _step_values)
from .trigger import (TriggerMode, TriggerParams, TriggerState, dynamic_fires,
                      static_fires, step_dynamic_variable, trigger_quantity)


class SimulationError(RuntimeError):
    def __init__(self, message: str, partial: Optional["SimResult"] = None):
        super().__init__(message)
        self.partial = partial


class BlowUpError(SimulationError):
    pass


_BLOWUP_FACTOR = 1e8


class KernelSolverKind(enum.Enum):
    CLOSED_FORM = "closed-form"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class CoefficientSpec:
    """Picklable recipe for a coefficient model (name plus parameters)."""

    name: str
    params: dict = field(default_factory=dict)

    def build(self) -> ReactionCoefficient:
        return make_coefficient(self.name, self.params)


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one closed-loop experiment."""

    n: int
    dt: float
    horizon: float
    plant: PlantConfig
    coefficient: CoefficientSpec
    trigger: TriggerParams
    kernel_solver: KernelSolverKind = KernelSolverKind.NUMERIC
    record_stride: int = 5
    kernel_tol: float = 1e-10
    kernel_max_iter: int = 200
    kernel_refine: int = 8
    record_supervision: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")
        if self.kernel_solver is KernelSolverKind.CLOSED_FORM:
            ok = (self.coefficient.name == "paper-example"
                  and self.plant.c == 0.0 and self.plant.epsilon == 1.0
                  and math.isinf(self.plant.q))
            if not ok:
                raise ValueError(
                    "closed-form kernels require the paper-example coefficient "
                    "with c = 0, epsilon = 1, q = +inf")

    def grid(self) -> Grid:
        return Grid(self.n)

    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True, eq=False)
class SimResult:
    """Recorded time series, event log, and final state of one run.

    With config.record_supervision the per-step scheduler diagnostics are
    kept unthinned: supervision carries columns (t, margin, m, fired,
    target_norm_sq) where margin = lhs - mu R norm_sq and target_norm_sq is
    the squared transformed-state norm (so the filtered energy
    W = target_norm_sq / 2 + m is reconstructible).
    """

    times: np.ndarray
    l2_norms: np.ndarray
    control: np.ndarray
    m_trace: Optional[np.ndarray]
    events: np.ndarray            # firing times, strictly positive
    final_state: Profile
    kernel_solves: int
    config: SimConfig
    supervision: Optional[dict] = None

    def event_times_with_origin(self) -> np.ndarray:
        """Event log including the initial sample at t = 0."""
        return np.concatenate([[0.0], self.events])

    def event_count(self, include_origin: bool = False) -> int:
        return len(self.events) + (1 if include_origin else 0)

    def inter_execution_times(self) -> np.ndarray:
        """Gaps between consecutive samplings, measured from t = 0."""
        return np.diff(self.event_times_with_origin())

    def event_stats(self) -> EventStats:
        return event_statistics(self.event_times_with_origin())


def initial_profile(grid: Grid, kind: str = "bump") -> Profile:
    """Named initial conditions: bump, zero, or family:<n>."""
    x = grid.nodes
    if kind == "bump":
        return Profile(grid, 2.0 * (x - x ** 2))
    if kind == "zero":
        return Profile.zeros(grid)
    if kind.startswith("family:"):
        return family_member(grid, int(kind.split(":", 1)[1]))
    raise ValueError(f"unknown initial profile {kind!r}")


def family_member(grid: Grid, n: int) -> Profile:
    """Member n >= 1 of the batch initial-condition family."""
    if n < 1:
        raise ValueError("family members are indexed from 1")
    x = grid.nodes
    return Profile(grid, np.sqrt(2.0 / n) * np.sin(np.sqrt(n) * np.pi * x)
                   + np.sqrt(n) * (x - x ** 2))


def _solve_gain(cfg: SimConfig, coeff: ReactionCoefficient,
                b: SampledCoefficient, grid: Grid) -> Kernel:
    if cfg.kernel_solver is KernelSolverKind.CLOSED_FORM:
        return solve_kernel_closed_form(coeff.time_offset(b.sample_time), grid,
                                        actuation=cfg.plant.actuation)
    return solve_kernel_numeric(b, cfg.plant.c, cfg.plant.epsilon, grid,
                                tol=cfg.kernel_tol, max_iter=cfg.kernel_max_iter,
                                q=cfg.plant.q, actuation=cfg.plant.actuation,
                                refine=cfg.kernel_refine)


def run_closed_loop(cfg: SimConfig, u0: Profile) -> SimResult:
    """Simulate the event-triggered closed loop over [0, horizon].

    The loop samples the coefficient at t = 0, solves the first kernel, and
    then, per step: computes the boundary control from the current state and
    kernel, advances the plant, evaluates the trigger on the new state (in
    dynamic mode after advancing the filter), and on firing resamples the
    coefficient, re-solves the kernel, and resets the filter. Series are
    recorded every record_stride steps; the event log is kept unthinned.
    """
    grid = cfg.grid()
    if u0.grid.n != grid.n:
        raise ValueError("initial profile grid does not match configuration")
    coeff = cfg.coefficient.build()
    validate_coefficient(coeff, t_max=cfg.horizon)
    params = cfg.trigger
    dynamic = params.mode is TriggerMode.DYNAMIC
    plant_cfg = cfg.plant
    dt = cfg.dt
    nsteps = cfg.steps()

    b0 = sample_coefficient(coeff, 0.0, grid)
    state = TriggerState(kernel=_solve_gain(cfg, coeff, b0, grid), b=b0)
    kernel_solves = 1

    times: List[float] = []
    norms: List[float] = []
    controls: List[float] = []
    m_trace: List[float] = []
    sup: Optional[dict] = None
    if cfg.record_supervision:
        sup = {"t": [], "margin": [], "m": [], "fired": [], "target_norm_sq": []}

    weights = grid.trapezoid_weights()
    u = u0
    norm0 = math.sqrt(float(weights @ (u.values * u.values)))
    blowup_limit = _BLOWUP_FACTOR * max(norm0, 1e-300)

    def record(t: float, u_now: Profile) -> None:
        times.append(t)
        norms.append(math.sqrt(float(weights @ (u_now.values * u_now.values))))
        controls.append(control_value(state.kernel, u_now, plant_cfg.actuation))
        if dynamic:
            m_trace.append(state.m)

    def partial_result() -> SimResult:
        packed = None
        if sup is not None:
            packed = {key: np.array(vals) for key, vals in sup.items()}
        return SimResult(times=np.array(times), l2_norms=np.array(norms),
                         control=np.array(controls),
                         m_trace=np.array(m_trace) if dynamic else None,
                         events=np.array(state.event_log), final_state=u,
                         kernel_solves=kernel_solves, config=cfg,
                         supervision=packed)

    record(0.0, u)
    t = 0.0
    for k in range(1, nsteps + 1):
        control = control_value(state.kernel, u, plant_cfg.actuation)
        values = _step_values(u.values, t, dt, control, coeff, plant_cfg, grid)
        t = k * dt
        if not np.all(np.isfinite(values)):
            raise BlowUpError(f"non-finite state at t = {t:.6g}", partial_result())
        u = Profile(grid, values)
        norm_now = math.sqrt(float(weights @ (values * values)))
        if norm_now > blowup_limit:
            raise BlowUpError(
                f"norm exceeded {_BLOWUP_FACTOR:.0e} x initial at t = {t:.6g}",
                partial_result())

        err = sampling_error(coeff, state.b, t, grid)
        f = Profile(grid, err.values * values)
        lhs, norm_sq = trigger_quantity(state.kernel, u, f)
        if dynamic:
            state.m = step_dynamic_variable(state.m, dt, params, lhs, norm_sq)
            fire = dynamic_fires(params, lhs, norm_sq, state.m)
        else:
            fire = static_fires(params, lhs, norm_sq)
        if fire:
            b = sample_coefficient(coeff, t, grid)
            try:
                kernel = _solve_gain(cfg, coeff, b, grid)
            except KernelSolveError as exc:
                raise SimulationError(
                    f"kernel solve failed at event t = {t:.6g}: {exc}",
                    partial_result()) from exc
            state.record_event(t, kernel, b)
            kernel_solves += 1
        if sup is not None:
            # m is the trajectory value at t: zero at event instants by reset
            sup["t"].append(t)
            sup["margin"].append(lhs - params.mu * params.R * norm_sq)
            sup["m"].append(state.m if dynamic else 0.0)
            sup["fired"].append(fire)
            sup["target_norm_sq"].append(norm_sq)
        if k % cfg.record_stride == 0 or k == nsteps:
            record(t, u)

    return partial_result()


def _batch_member(args) -> tuple[int, np.ndarray]:
    cfg, index = args
    result = run_closed_loop(cfg, family_member(cfg.grid(), index))
    return index, result.events


@dataclass(frozen=True, eq=False)
class BatchStats:
    """Aggregated event statistics over an initial-condition family."""

    n_runs: int
    counts: np.ndarray              # events per run, excluding t = 0
    pooled_gaps: np.ndarray         # inter-execution times pooled over runs
    config: SimConfig

    @property
    def mean_count(self) -> float:
        return float(self.counts.mean())

    @property
    def mean_count_with_origin(self) -> float:
        return self.mean_count + 1.0

    def pooled_stats(self) -> EventStats:
        if len(self.pooled_gaps) == 0:
            return EventStats(0, None, None)
        mean = float(self.pooled_gaps.mean())
        cv = float(self.pooled_gaps.std() / mean) if mean > 0 else math.inf
        return EventStats(len(self.pooled_gaps), mean, cv)


def batch_run(cfg: SimConfig, n_runs: int, workers: Optional[int] = None) -> BatchStats:
    """Run the closed loop for family members 1..n_runs and pool event data.

    Failures propagate with the member index attached. workers > 1 fans the
    members over a process pool; results are identical either way.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    jobs = [(cfg, idx) for idx in range(1, n_runs + 1)]
    events_by_run: dict[int, np.ndarray] = {}
    try:
        if workers and workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for idx, events in pool.map(_batch_member, jobs):
                    events_by_run[idx] = events
        else:
            for job in jobs:
                idx, events = _batch_member(job)
                events_by_run[idx] = events
    except SimulationError as exc:
        done = len(events_by_run)
        raise SimulationError(f"batch member {done + 1} failed: {exc}") from exc

    counts = np.array([len(events_by_run[i]) for i in range(1, n_runs + 1)], dtype=float)
    gaps = [np.diff(np.concatenate([[0.0], events_by_run[i]]))
            for i in range(1, n_runs + 1) if len(events_by_run[i])]
    pooled = np.concatenate(gaps) if gaps else np.array([])
    return BatchStats(n_runs=n_runs, counts=counts, pooled_gaps=pooled, config=cfg)


def paper_sim_config(mode: TriggerMode = TriggerMode.STATIC, R: float = 0.15,
                     eta: Optional[float] = None, theta: float = 0.15,
                     horizon: float = 2.0,
                     solver: KernelSolverKind = KernelSolverKind.CLOSED_FORM,
                     record_stride: int = 5) -> SimConfig:
    """Reference experiment: bump-plus-cosine coefficient on h = 0.02, dt = h^2."""
    mu = math.pi ** 2
    if mode is TriggerMode.STATIC:
        trig = TriggerParams.static(R=R, mu=mu)
    else:
        trig = TriggerParams.dynamic(R=R, mu=mu, theta=theta, eta=eta)
    plant_cfg = PlantConfig(epsilon=1.0, q=math.inf, actuation=Actuation.DIRICHLET, c=0.0)
    return SimConfig(n=51, dt=4e-4, horizon=horizon, plant=plant_cfg,
                     coefficient=CoefficientSpec("paper-example"), trigger=trig,
                     kernel_solver=solver, record_stride=record_stride)
