"""Shared discretization, quadrature, linear-solve, and special-function utilities.

Everything operates on a closed uniform grid over [0, 1]: both endpoints are
grid nodes, so Dirichlet data is imposed by direct assignment. Integrals use
the trapezoid rule, which is second-order accurate and consistent with the
centered divided-difference stencils used elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class NumericsError(ValueError):
    """Raised on invalid numerical input (non-finite data, mismatched grids)."""


class ZeroPivotError(NumericsError):
    """Raised when tridiagonal elimination hits a vanishing pivot."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"zero pivot at row {index} during tridiagonal elimination")


@dataclass(frozen=True)
class Grid:
    """Closed uniform grid on [0, 1] with n nodes and spacing h = 1/(n-1)."""

    n: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise NumericsError(f"grid needs at least 3 nodes, got {self.n}")
        object.__setattr__(self, "h", 1.0 / (self.n - 1))
        nodes = np.linspace(0.0, 1.0, self.n)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        w.setflags(write=False)
        object.__setattr__(self, "_weights", w)

    @classmethod
    def from_spacing(cls, h: float) -> "Grid":
        n = int(round(1.0 / h)) + 1
        if abs((n - 1) * h - 1.0) > 1e-12:
            raise NumericsError(f"spacing {h} does not divide [0, 1] evenly")
        return cls(n)

    def trapezoid_weights(self) -> np.ndarray:
        return self._weights


@dataclass(frozen=True, eq=False)
class Profile:
    """Real-valued function sampled on a Grid; immutable after construction."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise NumericsError(
                f"profile length {values.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(values)):
            raise NumericsError("profile contains non-finite entries")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Profile":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float) * np.ones(grid.n))

    @classmethod
    def zeros(cls, grid: Grid) -> "Profile":
        return cls(grid, np.zeros(grid.n))


def _require_same_grid(p: Profile, q: Profile) -> None:
    if p.grid.n != q.grid.n:
        raise NumericsError(f"grid mismatch: n={p.grid.n} vs n={q.grid.n}")


def inner_product(p: Profile, q: Profile) -> float:
    """Trapezoid approximation of the L2 inner product of two profiles."""
    _require_same_grid(p, q)
    return float(p.grid.trapezoid_weights() @ (p.values * q.values))


def l2_norm(p: Profile) -> float:
    """Trapezoid approximation of the L2 norm of a profile."""
    return float(np.sqrt(p.grid.trapezoid_weights() @ (p.values * p.values)))


def cumulative_trapezoid(values: np.ndarray, dx: float) -> np.ndarray:
    """Running trapezoid antiderivative of uniformly spaced samples; starts at 0."""
    out = np.zeros(len(values))
    out[1:] = np.cumsum(0.5 * dx * (values[:-1] + values[1:]))
    return out


def solve_tridiagonal(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                      rhs: np.ndarray) -> np.ndarray:
    """Solve a tridiagonal system by the Thomas algorithm.

    Parameters
    ----------
    lower : array, length n-1
        Sub-diagonal (row i couples to column i-1 via lower[i-1]).
    diag : array, length n
        Main diagonal.
    upper : array, length n-1
        Super-diagonal.
    rhs : array, length n
        Right-hand side.

    Returns
    -------
    array
        Solution x with A @ x = rhs, via O(n) forward elimination and
        back substitution.

    Raises
    ------
    ZeroPivotError
        If elimination encounters a vanishing pivot (index reported).
    """
    n = len(diag)
    if len(lower) != n - 1 or len(upper) != n - 1 or len(rhs) != n:
        raise NumericsError("inconsistent tridiagonal system dimensions")
    scale = float(np.max(np.abs(diag))) or 1.0
    cp = np.empty(n - 1)
    dp = np.empty(n)
    piv = diag[0]
    if abs(piv) <= 1e-300 * scale:
        raise ZeroPivotError(0)
    cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if abs(piv) <= 1e-300 * scale:
            raise ZeroPivotError(i)
        if i < n - 1:
            cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


_ASYMPTOTIC_CUTOFF = 20.0


def _bessel_i_series(order: int, x: np.ndarray) -> np.ndarray:
    # ascending series: I0 = sum (x^2/4)^k / (k!)^2, I1 = (x/2) sum (x^2/4)^k / (k! (k+1)!)
    z = 0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, 400):
        term = term * z / (k * (k + order))
        total += term
        if np.all(term <= 1e-17 * np.abs(total)):
            break
    return total


def _bessel_i_asymptotic(order: int, x: np.ndarray) -> np.ndarray:
    # large-argument expansion: I_nu ~ e^x / sqrt(2 pi x) * sum_k T_k,
    # T_0 = 1, T_k = -T_{k-1} (4 nu^2 - (2k-1)^2) / (8 k x)
    four_nu_sq = 4.0 * order * order
    term = np.ones_like(x)
    total = term.copy()
    prev_mag = np.full_like(x, np.inf)
    for k in range(1, 40):
        term = term * (-(four_nu_sq - (2 * k - 1) ** 2) / (8.0 * k)) / x
        mag = np.abs(term)
        if np.all(mag >= prev_mag):  # past the optimal truncation point
            break
        total += term
        prev_mag = mag
        if np.all(mag <= 1e-17 * np.abs(total)):
            break
    return np.exp(x) / np.sqrt(2.0 * np.pi * x) * total


def _bessel_i(order: int, x) -> np.ndarray | float:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericsError("Bessel argument must be finite")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    sign = np.where(arr < 0, -1.0 if order == 1 else 1.0, 1.0)
    a = np.abs(arr)
    out = np.empty_like(a)
    small = a <= _ASYMPTOTIC_CUTOFF
    if np.any(small):
        out[small] = _bessel_i_series(order, a[small])
    if np.any(~small):
        out[~small] = _bessel_i_asymptotic(order, a[~small])
    out *= sign
    return float(out[0]) if scalar else out


def bessel_i0(x) -> np.ndarray | float:
    """Modified Bessel function of the first kind, order 0 (even in x)."""
    return _bessel_i(0, x)


def bessel_i1(x) -> np.ndarray | float:
    """Modified Bessel function of the first kind, order 1 (odd in x)."""
    return _bessel_i(1, x)
