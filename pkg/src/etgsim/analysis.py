"""Closed-form stability constants, the decay envelope, and event statistics.

The guaranteed transform bound

    G = 1 + sqrt( (lambda_bar + c) / (4 eps) * (exp(4 (lambda_bar + c) / eps) - 1) )

dominates the norms of both Volterra transforms for every admissible frozen
coefficient. The closed loop under the static scheduler is exponentially
stable whenever

    phi < mu^2 R (1 - R) / (G^2 ln G),

in which case ||u[t]|| <= G exp(-sigma t) ||u[0]|| with

    sigma = (mu^2 R (1 - R) - phi G^2 ln G) / (mu R).

G grows exponentially in (lambda_bar + c) / eps, so for strongly unstable
coefficients the condition fails by a wide margin even when simulations
decay; the report states that rather than hiding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np


class AnalysisError(ValueError):
    pass


class GrowthBound(NamedTuple):
    value: float
    overflowed: bool


_EXP_ARG_LIMIT = 709.0  # exp overflows float64 just above this


def transform_bound_G(lambda_bar: float, c: float, epsilon: float) -> GrowthBound:
    """Guaranteed transform bound G; flagged +inf when the exponential overflows."""
    if epsilon <= 0:
        raise AnalysisError("epsilon must be positive")
    if lambda_bar < 0 or c < 0:
        raise AnalysisError("lambda_bar and c must be nonnegative")
    s = (lambda_bar + c) / epsilon
    if s == 0.0:
        return GrowthBound(1.0, False)
    if 4.0 * s > _EXP_ARG_LIMIT:
        return GrowthBound(math.inf, True)
    radicand = 0.25 * s * math.expm1(4.0 * s)
    if radicand > 1e308:
        return GrowthBound(math.inf, True)
    return GrowthBound(1.0 + math.sqrt(radicand), False)


def stability_condition(phi: float, mu: float, R: float, G: float) -> bool:
    """Sufficient exponential-stability condition phi < mu^2 R (1-R) / (G^2 ln G)."""
    if not 0.0 < R < 1.0:
        raise AnalysisError("R must lie in (0, 1)")
    if G <= 1.0:
        raise AnalysisError(
            "stability condition is degenerate for G <= 1 (vacuous bound at G = 1)")
    if phi < 0:
        raise AnalysisError("phi must be nonnegative")
    if not math.isfinite(G):
        return False
    return phi < mu ** 2 * R * (1.0 - R) / (G ** 2 * math.log(G))


def decay_rate_sigma(phi: float, mu: float, R: float, G: float) -> float:
    """Guaranteed decay rate sigma = (mu^2 R (1-R) - phi G^2 ln G) / (mu R)."""
    if not stability_condition(phi, mu, R, G):
        raise AnalysisError("decay rate undefined: stability condition does not hold")
    return (mu ** 2 * R * (1.0 - R) - phi * G ** 2 * math.log(G)) / (mu * R)


def check_decay_envelope(times: Sequence[float], norms: Sequence[float],
                         G: float, sigma: float) -> bool:
    """True iff norms[k] <= G exp(-sigma t_k) norms[0] at every recorded time."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(norms, dtype=float)
    if t.shape != v.shape:
        raise AnalysisError("times and norms must align")
    if len(v) == 0:
        return True
    envelope = G * np.exp(-sigma * t) * v[0]
    return bool(np.all(v <= envelope))


@dataclass(frozen=True)
class EventStats:
    """Count and inter-execution summary of an event log.

    Statistics are population-convention (std divided by N) and are None
    when fewer than two events exist.
    """

    count: int
    mean_inter_execution: Optional[float]
    coefficient_of_variation: Optional[float]

    @property
    def defined(self) -> bool:
        return self.mean_inter_execution is not None


def event_statistics(events: Sequence[float]) -> EventStats:
    """Summarize a sorted event log by its consecutive gaps."""
    ev = np.asarray(events, dtype=float)
    if len(ev) >= 2 and np.any(np.diff(ev) <= 0):
        raise AnalysisError("event log must be strictly increasing")
    if len(ev) < 2:
        return EventStats(count=len(ev), mean_inter_execution=None,
                          coefficient_of_variation=None)
    gaps = np.diff(ev)
    mean = float(gaps.mean())
    cv = float(gaps.std() / mean) if mean > 0 else math.inf
    return EventStats(count=len(ev), mean_inter_execution=mean,
                      coefficient_of_variation=cv)


@dataclass(frozen=True)
class StabilityReport:
    """Stability constants for one parameter set, with inputs echoed."""

    lambda_bar: float
    c: float
    epsilon: float
    phi: float
    R: float
    mu: float
    G: float
    G_overflowed: bool
    tau: Optional[float]
    condition_holds: bool
    condition_vacuous: bool
    sigma: Optional[float]

    def lines(self) -> list[str]:
        out = [
            f"lambda_bar = {self.lambda_bar:g}, c = {self.c:g}, epsilon = {self.epsilon:g}",
            f"phi = {self.phi:g}, R = {self.R:g}, mu = {self.mu:.12g}",
        ]
        if self.G_overflowed:
            out.append("G overflows double precision (flagged sentinel, reported as inf)")
        else:
            out.append(f"G = {self.G:.12g}")
        out.append(f"minimal dwell time tau = "
                   + (f"{self.tau:.12g}" if self.tau is not None else "undefined (phi = 0)"))
        if self.condition_vacuous:
            out.append("stability condition vacuously satisfied (G = 1)")
        elif self.condition_holds:
            out.append(f"stability condition holds; sigma = {self.sigma:.12g}")
        else:
            out.append("stability condition FAILS: the guaranteed envelope "
                       "is not available at these constants")
        return out


def build_stability_report(lambda_bar: float, c: float, epsilon: float, phi: float,
                           R: float, mu: float) -> StabilityReport:
    """Assemble G, tau, the condition verdict, and sigma for one parameter set."""
    G, overflowed = transform_bound_G(lambda_bar, c, epsilon)
    tau = None
    if phi > 0 and math.isfinite(G):
        tau = (1.0 / phi) * (mu * R / G ** 2)
    if G == 1.0:
        # vacuous bound: transforms are the identity, decay rate mu (1 - R)
        return StabilityReport(lambda_bar, c, epsilon, phi, R, mu, G, overflowed,
                               tau, True, True, mu * (1.0 - R))
    holds = stability_condition(phi, mu, R, G)
    sigma = decay_rate_sigma(phi, mu, R, G) if holds else None
    return StabilityReport(lambda_bar, c, epsilon, phi, R, mu, G, overflowed,
                           tau, holds, False, sigma)
