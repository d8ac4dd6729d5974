"""Backstepping kernels, Volterra transforms, and the boundary control laws.

Direct transform:   w(x) = u(x) - int_0^x K(x, y) u(y) dy
Inverse transform:  u(x) = w(x) + int_0^x L(x, y) w(y) dy

K solves, on the triangle 0 <= y <= x <= 1,

    K_xx - K_yy = ((b(y) + c) / eps) K
    K_y(x, 0) = q K(x, 0)            (K(x, 0) = 0 when q = +inf)
    K(x, x) = -(1 / (2 eps)) int_0^x (b(s) + c) ds

and L solves the same problem with the reaction term sign-flipped and
evaluated in the first argument: -((b(x) + c) / eps) L.

The numeric solver rewrites the problem in characteristic coordinates
xi = x + y, eta = x - y, where it becomes G_xieta = F * G with G known on
eta = 0 (the trace) and on xi = eta (the lateral boundary), and iterates
the equivalent Volterra integral equation by successive approximations
with trapezoid quadrature. The internal lattice is a refinement of the
grid so that grid nodes are recovered without interpolating G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import (Grid, NumericsError, Profile, bessel_i0, bessel_i1,
                       cumulative_trapezoid, inner_product, l2_norm)
from .plant import Actuation, SampledCoefficient


class KernelSolveError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Kernel:
    """Lower-triangular kernel table on a grid, with solve metadata.

    table[i, k] holds K(x_i, y_k) for k <= i and is zero above the diagonal.
    x_derivative_trace holds K_x(1, y_k) when populated (needed by the
    Neumann control law). is_inverse marks inverse-transform kernels.
    """

    grid: Grid
    table: np.ndarray = field(repr=False)
    b: SampledCoefficient
    c: float
    epsilon: float
    is_inverse: bool = False
    x_derivative_trace: Optional[np.ndarray] = field(default=None, repr=False)
    iterations: Optional[int] = None
    final_increment: Optional[float] = None
    increment_history: Optional[tuple] = field(default=None, repr=False)
    _weighted: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.shape != (self.grid.n, self.grid.n):
            raise NumericsError("kernel table shape does not match grid")
        if not np.all(np.isfinite(table)):
            raise NumericsError("kernel table contains non-finite entries")
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def weighted_table(self) -> np.ndarray:
        """Kernel table pre-multiplied by the triangular trapezoid weights.

        Row i carries the trapezoid rule on [0, x_i]: weight h/2 at y_0 and
        y_i, h in between, zero above the diagonal. Computed once per kernel.
        """
        if self._weighted is None:
            n = self.grid.n
            w = np.full((n, n), self.grid.h)
            w[:, 0] = 0.5 * self.grid.h
            w[np.arange(n), np.arange(n)] = 0.5 * self.grid.h
            w = np.tril(w)
            w[0, 0] = 0.0
            object.__setattr__(self, "_weighted", w * self.table)
        return self._weighted


def trace_target(b: SampledCoefficient, c: float, epsilon: float) -> np.ndarray:
    """Antiderivative form of the trace condition at the grid nodes.

    Returns -(1 / (2 eps)) * int_0^{x_i} (b + c) ds evaluated with the same
    refined quadrature the numeric solver uses, so solver traces can be
    checked against it to tolerance rather than to discretization error.
    """
    grid = b.values.grid
    refine = _DEFAULT_REFINE
    fine = _resample_half_lattice(b.values.values + c, grid.n, refine)
    anti = cumulative_trapezoid(fine, 0.5 * grid.h / refine)
    return -anti[:: 2 * refine] / (2.0 * epsilon)


def _lagrange_cubic(vals: np.ndarray, t: np.ndarray) -> np.ndarray:
    # 4-point interpolation at fractional node indices t; one-sided at the ends
    n = len(vals)
    i = np.clip(np.floor(t).astype(int), 1, n - 3)
    s = t - i
    vm1, v0, v1, v2 = vals[i - 1], vals[i], vals[i + 1], vals[i + 2]
    return (-s * (s - 1) * (s - 2) / 6.0 * vm1
            + (s * s - 1) * (s - 2) / 2.0 * v0
            - s * (s + 1) * (s - 2) / 2.0 * v1
            + s * (s * s - 1) / 6.0 * v2)


def _resample_half_lattice(node_vals: np.ndarray, n: int, refine: int) -> np.ndarray:
    """Coefficient values at the lattice half-points j * h / (2 refine)."""
    m = 2 * (n - 1) * refine
    frac = np.arange(m + 1) / (2.0 * refine)
    return _lagrange_cubic(node_vals, frac)


_DEFAULT_REFINE = 8
_DEFAULT_TOL = 1e-10
_DEFAULT_MAX_ITER = 200


def _solve_characteristic(b: SampledCoefficient, c: float, epsilon: float, q: float,
                          inverse: bool, tol: float, max_iter: int,
                          refine: int) -> tuple[np.ndarray, list]:
    """Successive approximations for G(xi, eta) on the refined lattice.

    Fixed point, for q = +inf (G vanishes on xi = eta):

        G(xi, eta) = g(xi) - g(eta)
                     + int_eta^xi int_0^eta F(tau, s) G(tau, s) ds dtau

    For finite q the lateral value psi(xi) = G(xi, xi) satisfies
    psi' = 2 g'(xi) + 2 int_0^xi F(xi, s) G(xi, s) ds - q psi, psi(0) = 0,
    and enters the fixed point as an extra psi(eta) term.
    """
    grid = b.values.grid
    n = grid.n
    hc = grid.h / refine
    m = 2 * (n - 1) * refine

    bc_half = _resample_half_lattice(b.values.values + c, n, refine)
    theta_half = bc_half / epsilon
    g = -cumulative_trapezoid(bc_half, 0.5 * hc) / (2.0 * epsilon)

    idx = np.arange(m + 1)
    xi_idx, eta_idx = np.meshgrid(idx, idx, indexing="ij")
    domain = (eta_idx <= xi_idx) & (xi_idx + eta_idx <= m)
    if inverse:
        coeff_field = -theta_half[np.minimum(xi_idx + eta_idx, m)]
    else:
        coeff_field = theta_half[np.abs(xi_idx - eta_idx)]
    F = np.where(domain, 0.25 * coeff_field, 0.0)

    base = np.where(domain, g[xi_idx] - g[eta_idx], 0.0)
    robin = not math.isinf(q)
    G = base.copy()
    increments: list = []
    diag = np.arange(m + 1)
    for _ in range(max_iter):
        FG = F * G
        # P[a, e] = int_0^{eta_e} F(xi_a, s) G(xi_a, s) ds
        P = np.zeros_like(G)
        P[:, 1:] = np.cumsum(0.5 * hc * (FG[:, :-1] + FG[:, 1:]), axis=1)
        # Q[a, e] = int_0^{xi_a} P(tau, eta_e) dtau
        Q = np.zeros_like(G)
        Q[1:, :] = np.cumsum(0.5 * hc * (P[:-1, :] + P[1:, :]), axis=0)
        new = base + (Q - Q[diag, diag][None, :])
        if robin:
            # psi' = -q psi + rhs, rhs = 2 g' + 2 P(xi, xi); integrating factor
            # exact, rhs by exponentially weighted trapezoid per lattice step
            rhs_diag = -0.5 * theta_half + 2.0 * P[diag, diag]  # 2 g' = -theta/2
            psi = np.zeros(m + 1)
            decay = math.exp(-q * hc)
            for a in range(1, m + 1):
                psi[a] = psi[a - 1] * decay + 0.5 * hc * (decay * rhs_diag[a - 1]
                                                          + rhs_diag[a])
            new = new + np.where(domain, psi[eta_idx], 0.0)
        new = np.where(domain, new, 0.0)
        increments.append(float(np.max(np.abs(new - G))))
        G = new
        if increments[-1] < tol:
            break
    else:
        raise KernelSolveError(
            f"kernel iteration did not converge in {max_iter} sweeps "
            f"(last increment {increments[-1]:.3e}, tol {tol:.1e})")
    return G, increments


def _table_from_lattice(G: np.ndarray, n: int, refine: int) -> np.ndarray:
    table = np.zeros((n, n))
    ii, kk = np.tril_indices(n)
    table[ii, kk] = G[refine * (ii + kk), refine * (ii - kk)]
    return table


def _x_derivative_trace(table: np.ndarray, grid: Grid) -> np.ndarray:
    """K_x(1, y) by one-sided differences in x on the last triangle rows."""
    n = grid.n
    h = grid.h
    trace = np.empty(n)
    k = np.arange(0, n - 2)
    trace[k] = (3.0 * table[n - 1, k] - 4.0 * table[n - 2, k] + table[n - 3, k]) / (2.0 * h)
    trace[n - 2] = (table[n - 1, n - 2] - table[n - 2, n - 2]) / h
    trace[n - 1] = 2.0 * trace[n - 2] - trace[n - 3]
    return trace


def solve_kernel_numeric(b: SampledCoefficient, c: float, epsilon: float, grid: Grid,
                         tol: float = _DEFAULT_TOL, max_iter: int = _DEFAULT_MAX_ITER,
                         q: float = math.inf, actuation: Actuation = Actuation.DIRICHLET,
                         refine: int = _DEFAULT_REFINE) -> Kernel:
    """Solve the direct-transform kernel by successive approximations.

    Parameters
    ----------
    b : SampledCoefficient
        Frozen reaction profile on `grid`.
    c : float
        Target-system damping parameter.
    epsilon : float
        Diffusion coefficient.
    grid : Grid
        Output grid; the solve runs on an internal lattice `refine` times finer.
    tol : float
        Sup-norm increment at which the iteration stops.
    max_iter : int
        Iteration cap; exceeding it raises KernelSolveError with the last
        increment.
    q : float
        Left boundary parameter (+inf for the Dirichlet case).
    actuation : Actuation
        Neumann actuation additionally populates the K_x(1, y) trace.
    """
    if tol <= 0:
        raise NumericsError("tol must be positive")
    if b.values.grid.n != grid.n:
        raise NumericsError("sampled coefficient grid does not match target grid")
    G, increments = _solve_characteristic(b, c, epsilon, q, False, tol, max_iter, refine)
    table = _table_from_lattice(G, grid.n, refine)
    trace = _x_derivative_trace(table, grid) if actuation is Actuation.NEUMANN else None
    return Kernel(grid=grid, table=table, b=b, c=c, epsilon=epsilon,
                  x_derivative_trace=trace, iterations=len(increments),
                  final_increment=increments[-1], increment_history=tuple(increments))


def solve_inverse_kernel(b: SampledCoefficient, c: float, epsilon: float, grid: Grid,
                         tol: float = _DEFAULT_TOL, max_iter: int = _DEFAULT_MAX_ITER,
                         q: float = math.inf,
                         refine: int = _DEFAULT_REFINE) -> Kernel:
    """Solve the inverse-transform kernel (sign-flipped reaction in x)."""
    if tol <= 0:
        raise NumericsError("tol must be positive")
    G, increments = _solve_characteristic(b, c, epsilon, q, True, tol, max_iter, refine)
    table = _table_from_lattice(G, grid.n, refine)
    return Kernel(grid=grid, table=table, b=b, c=c, epsilon=epsilon, is_inverse=True,
                  iterations=len(increments), final_increment=increments[-1],
                  increment_history=tuple(increments))


def solve_kernel_closed_form(lambda_tilde: float, grid: Grid,
                             actuation: Actuation = Actuation.DIRICHLET) -> Kernel:
    """Bessel-form kernel for the coefficient family lam_tilde + 50 / cosh^2(5x).

    Valid for c = 0, eps = 1, q = +inf only:

        K(x, y) = -lam_tilde * y * I1(z) / z - 5 tanh(5 y) I0(z),
        z = sqrt(lam_tilde * (x^2 - y^2))

    with I1(z)/z continued by its limit 1/2 at z = 0.
    """
    if lambda_tilde <= 0:
        raise NumericsError("lambda_tilde must be positive")
    x = grid.nodes
    X, Y = np.meshgrid(x, x, indexing="ij")
    z_sq = lambda_tilde * (X ** 2 - Y ** 2)
    z = np.sqrt(np.maximum(z_sq, 0.0))
    safe = np.where(z > 1e-6, z, 1.0)
    ratio = np.where(z > 1e-6, bessel_i1(safe) / safe, 0.5)
    table = np.tril(-lambda_tilde * Y * ratio - 5.0 * np.tanh(5.0 * Y) * bessel_i0(z))
    bvals = lambda_tilde + 50.0 / np.cosh(5.0 * x) ** 2
    b = SampledCoefficient(values=Profile(grid, bvals), sample_time=0.0)
    trace = _x_derivative_trace(table, grid) if actuation is Actuation.NEUMANN else None
    return Kernel(grid=grid, table=table, b=b, c=0.0, epsilon=1.0,
                  x_derivative_trace=trace)


# --- transforms and control ----------------------------------------------------

def direct_transform(kernel: Kernel, u: Profile) -> Profile:
    """Apply w = u - int_0^x K(x, y) u(y) dy row-wise by trapezoid quadrature."""
    if u.grid.n != kernel.grid.n:
        raise NumericsError("profile grid does not match kernel grid")
    return Profile(u.grid, u.values - kernel.weighted_table() @ u.values)


def inverse_transform(kernel: Kernel, w: Profile) -> Profile:
    """Apply u = w + int_0^x L(x, y) w(y) dy row-wise by trapezoid quadrature."""
    if w.grid.n != kernel.grid.n:
        raise NumericsError("profile grid does not match kernel grid")
    return Profile(w.grid, w.values + kernel.weighted_table() @ w.values)


def control_value(kernel: Kernel, u: Profile, actuation: Actuation) -> float:
    """Boundary control from the current kernel row at x = 1.

    Dirichlet: U = int_0^1 K(1, y) u(y) dy.
    Neumann:   U = K(1, 1) u(1) + int_0^1 K_x(1, y) u(y) dy.
    """
    if u.grid.n != kernel.grid.n:
        raise NumericsError("profile grid does not match kernel grid")
    w = u.grid.trapezoid_weights()
    if actuation is Actuation.DIRICHLET:
        return float(w @ (kernel.table[-1, :] * u.values))
    if kernel.x_derivative_trace is None:
        raise NumericsError("Neumann control requires the kernel x-derivative trace")
    return float(kernel.table[-1, -1] * u.values[-1]
                 + w @ (kernel.x_derivative_trace * u.values))


def transform_bound(kernel: Kernel) -> float:
    """Transform norm bound 1 + (double integral of K^2 over the triangle)^(1/2)."""
    grid = kernel.grid
    w = grid.trapezoid_weights()
    row_integrals = np.empty(grid.n)
    for i in range(grid.n):
        wi = np.full(i + 1, grid.h)
        wi[0] = wi[-1] = 0.5 * grid.h
        row_integrals[i] = wi @ kernel.table[i, : i + 1] ** 2 if i else 0.0
    return 1.0 + math.sqrt(float(w @ row_integrals))


def kernel_rows(kernel: Kernel):
    """Yield (x, y, K(x, y)) for the lower triangle, row by row."""
    x = kernel.grid.nodes
    for i in range(kernel.grid.n):
        for k in range(i + 1):
            yield x[i], x[k], kernel.table[i, k]
