"""Reaction-diffusion plant: u_t = eps * u_xx + lambda(t, x) * u on [0, 1].

The left boundary carries u_x(t, 0) = q * u(t, 0) with q = +inf read as the
Dirichlet condition u(t, 0) = 0. The right boundary is actuated, either as
u(t, 1) = U(t) (Dirichlet) or u_x(t, 1) = U(t) (Neumann). Time stepping is
implicit Euler on centered second differences, with ghost-node elimination
at derivative boundaries so each step stays a tridiagonal solve.

The reaction coefficient is a model object declaring its own uniform bound
(lambda_bar) and time-Lipschitz constant (phi); both are inputs to the
scheduler analysis and are spot-checked, never estimated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .numerics import Grid, NumericsError, Profile, solve_tridiagonal


class PlantError(ValueError):
    pass


class Actuation(enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True, eq=False)
class ReactionCoefficient:
    """Evaluator lambda(t, x) with declared bound and time-Lipschitz constant.

    evaluate(t, x_array) must be pure, vectorized in x, and reentrant.
    time_offset, when present, gives the spatially constant part of the
    coefficient (used by the closed-form kernel of the bump-plus-cosine
    example model).
    """

    name: str
    evaluate: Callable[[float, np.ndarray], np.ndarray]
    lambda_bar: float
    phi: float
    time_offset: Optional[Callable[[float], float]] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lambda_bar < 0:
            raise PlantError("lambda_bar must be nonnegative")
        if self.phi < 0:
            raise PlantError("phi must be nonnegative")


@dataclass(frozen=True, eq=False)
class SampledCoefficient:
    """Coefficient profile frozen at a sampling time."""

    values: Profile
    sample_time: float

    def __post_init__(self):
        if self.sample_time < 0:
            raise PlantError("sample time must be nonnegative")


@dataclass(frozen=True)
class PlantConfig:
    """Diffusion, boundary parameter, actuation type, and target damping c.

    For Dirichlet actuation c must satisfy c >= eps * qbar^2, for Neumann
    actuation c >= eps * qbar^2 + eps / 2, where qbar = max(0, -q) and
    qbar = 0 when q = +inf.
    """

    epsilon: float
    q: float
    actuation: Actuation
    c: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise PlantError("epsilon must be positive")
        if math.isnan(self.q):
            raise PlantError("q must be a real number or +inf")
        qbar = self.qbar
        floor = self.epsilon * qbar ** 2
        if self.actuation is Actuation.NEUMANN:
            floor += 0.5 * self.epsilon
        if self.c < floor - 1e-12:
            raise PlantError(
                f"c={self.c} below admissible floor {floor} for {self.actuation.value} actuation")

    @property
    def qbar(self) -> float:
        if math.isinf(self.q):
            return 0.0
        return max(0.0, -self.q)

    @property
    def dirichlet_at_zero(self) -> bool:
        return math.isinf(self.q)


# --- coefficient models -------------------------------------------------------

_BUMP_COSINE_NAME = "paper-example"


def _bump_cosine_time(t):
    return 10.0 + 50.0 / np.cosh(5.0 * (t - 1.0)) ** 2 + 7.0 * np.cos(5.0 * np.pi * t)


def _make_bump_cosine(params: dict) -> ReactionCoefficient:
    # declared constants are upper bounds over t in [0, 2], x in [0, 1]
    def evaluate(t, x):
        return _bump_cosine_time(t) + 50.0 / np.cosh(5.0 * np.asarray(x)) ** 2

    return ReactionCoefficient(
        name=_BUMP_COSINE_NAME,
        evaluate=evaluate,
        lambda_bar=117.0,
        phi=303.0,
        time_offset=lambda t: float(_bump_cosine_time(t)),
        params=dict(params),
    )


def _make_constant(params: dict) -> ReactionCoefficient:
    value = float(params.get("value", 0.0))

    def evaluate(t, x):
        return np.full_like(np.asarray(x, dtype=float), value)

    return ReactionCoefficient(
        name="constant",
        evaluate=evaluate,
        lambda_bar=abs(value),
        phi=float(params.get("phi", 0.0)),
        time_offset=lambda t: value,
        params=dict(params),
    )


def _make_slow_sine(params: dict) -> ReactionCoefficient:
    a = float(params.get("amplitude", 0.25))
    omega = float(params.get("rate", 2.0))
    phase = float(params.get("phase", 0.0))
    offset = float(params.get("offset", 0.0))
    s = float(params.get("spatial_amplitude", 0.25))

    def evaluate(t, x):
        return (offset + a * np.sin(omega * t + phase)
                + s * np.sin(np.pi * np.asarray(x, dtype=float)))

    lambda_bar = float(params.get("lambda_bar", abs(offset) + abs(a) + abs(s)))
    phi = float(params.get("phi", abs(a) * abs(omega)))
    return ReactionCoefficient(
        name="slow-sine", evaluate=evaluate, lambda_bar=lambda_bar, phi=phi,
        time_offset=lambda t: offset + a * math.sin(omega * t + phase),
        params=dict(params),
    )


def _make_tabulated(params: dict) -> ReactionCoefficient:
    path = params.get("path")
    if path is None:
        raise PlantError("tabulated coefficient requires a 'path' parameter")
    data = np.genfromtxt(path, delimiter=",", names=True)
    ts = np.unique(data["t"])
    xs = np.unique(data["x"])
    table = np.full((len(ts), len(xs)), np.nan)
    ti = np.searchsorted(ts, data["t"])
    xi = np.searchsorted(xs, data["x"])
    table[ti, xi] = data["lambda"]
    if np.any(np.isnan(table)):
        raise PlantError(f"tabulated coefficient {path} is not a complete (t, x) grid")

    def evaluate(t, x):
        # bilinear interpolation, clamped to the tabulated range
        t = min(max(t, ts[0]), ts[-1])
        it = min(np.searchsorted(ts, t, side="right") - 1, len(ts) - 2)
        wt = (t - ts[it]) / (ts[it + 1] - ts[it])
        row = (1 - wt) * table[it] + wt * table[it + 1]
        return np.interp(np.asarray(x, dtype=float), xs, row)

    if "lambda_bar" not in params or "phi" not in params:
        raise PlantError("tabulated coefficient requires declared 'lambda_bar' and 'phi'")
    return ReactionCoefficient(
        name="tabulated", evaluate=evaluate,
        lambda_bar=float(params["lambda_bar"]), phi=float(params["phi"]),
        params=dict(params),
    )


_MODELS = {
    _BUMP_COSINE_NAME: _make_bump_cosine,
    "constant": _make_constant,
    "slow-sine": _make_slow_sine,
    "tabulated": _make_tabulated,
}


def make_coefficient(model: str, params: Optional[dict] = None) -> ReactionCoefficient:
    """Build a named coefficient model: paper-example, constant, slow-sine, tabulated."""
    try:
        factory = _MODELS[model]
    except KeyError:
        raise PlantError(f"unknown coefficient model {model!r}; "
                         f"available: {sorted(_MODELS)}") from None
    return factory(params or {})


def validate_coefficient(coeff: ReactionCoefficient, t_max: float = 2.0,
                         nt: int = 401, nx: int = 101) -> None:
    """Spot-check declared lambda_bar and phi on a dense (t, x) sample.

    Rejects models whose samples exceed the declarations by more than 1e-6
    relative. Declarations are allowed to be conservative upper bounds.
    """
    ts = np.linspace(0.0, t_max, nt)
    xs = np.linspace(0.0, 1.0, nx)
    vals = np.array([coeff.evaluate(t, xs) for t in ts])
    if not np.all(np.isfinite(vals)):
        raise PlantError(f"coefficient {coeff.name!r} produced non-finite values")
    worst = float(np.max(np.abs(vals)))
    if worst > coeff.lambda_bar * (1.0 + 1e-6) + 1e-300:
        raise PlantError(
            f"coefficient {coeff.name!r} exceeds declared bound: "
            f"max |lambda| = {worst} > lambda_bar = {coeff.lambda_bar}")
    dt = ts[1] - ts[0]
    rates = np.max(np.abs(np.diff(vals, axis=0)), axis=1) / dt
    worst_rate = float(np.max(rates))
    if worst_rate > coeff.phi * (1.0 + 1e-6) + 1e-300:
        raise PlantError(
            f"coefficient {coeff.name!r} varies faster than declared: "
            f"sampled rate {worst_rate} > phi = {coeff.phi}")


# --- sampling and time stepping -----------------------------------------------

def sample_coefficient(coeff: ReactionCoefficient, t_j: float, grid: Grid) -> SampledCoefficient:
    """Freeze the coefficient profile at time t_j on the grid."""
    if t_j < 0:
        raise PlantError("sampling time must be nonnegative")
    vals = np.asarray(coeff.evaluate(t_j, grid.nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise PlantError(f"coefficient {coeff.name!r} non-finite at t={t_j}")
    return SampledCoefficient(values=Profile(grid, vals), sample_time=t_j)


def sampling_error(coeff: ReactionCoefficient, b: SampledCoefficient, t: float,
                   grid: Grid) -> Profile:
    """Deviation of the live coefficient from its frozen sample: lambda(t,.) - b."""
    if t < b.sample_time:
        raise PlantError(f"t={t} precedes the sample time {b.sample_time}")
    live = np.asarray(coeff.evaluate(t, grid.nodes), dtype=float)
    return Profile(grid, live - b.values.values)


def _step_values(values: np.ndarray, t: float, dt: float, control: float,
                 coeff: ReactionCoefficient, cfg: PlantConfig, grid: Grid) -> np.ndarray:
    """Advance raw node values by one implicit Euler step (fast path)."""
    n = grid.n
    h = grid.h
    eps = cfg.epsilon
    lam_new = np.asarray(coeff.evaluate(t + dt, grid.nodes), dtype=float)
    r = dt * eps / h ** 2
    lower = np.full(n - 1, -r)
    upper = np.full(n - 1, -r)
    diag = 1.0 + 2.0 * r - dt * lam_new
    rhs = values.copy()

    if cfg.dirichlet_at_zero:
        diag[0] = 1.0
        upper[0] = 0.0
        rhs[0] = 0.0
    else:
        # ghost node u(-h) = u(h) - 2 h q u(0), eliminated into row 0
        diag[0] = 1.0 + 2.0 * r * (1.0 + h * cfg.q) - dt * lam_new[0]
        upper[0] = -2.0 * r

    if cfg.actuation is Actuation.DIRICHLET:
        diag[-1] = 1.0
        lower[-1] = 0.0
        rhs[-1] = control
    else:
        # ghost node u(1+h) = u(1-h) + 2 h U, eliminated into row n-1
        lower[-1] = -2.0 * r
        rhs[-1] = values[-1] + 2.0 * dt * eps * control / h

    return solve_tridiagonal(lower, diag, upper, rhs)


def step_plant(u: Profile, t: float, dt: float, control: float,
               coeff: ReactionCoefficient, cfg: PlantConfig) -> Profile:
    """One implicit Euler step of the plant under boundary input `control`.

    The reaction term is taken at t + dt (fully implicit); the control value
    is supplied by the caller, evaluated from the state at time t.
    """
    if dt <= 0:
        raise PlantError("dt must be positive")
    out = _step_values(u.values, t, dt, control, coeff, cfg, u.grid)
    if not np.all(np.isfinite(out)):
        raise NumericsError("plant step produced non-finite state")
    return Profile(u.grid, out)
