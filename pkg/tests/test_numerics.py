import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import smooth_profile
from etgsim import (Grid, NumericsError, Profile, ZeroPivotError, bessel_i0,
                    bessel_i1, inner_product, l2_norm, solve_tridiagonal)


def bessel_series_oracle(order: int, x: float) -> float:
    # ascending series summed to machine convergence; independent of the library path
    z = 0.25 * x * x
    term = 1.0 if order == 0 else 0.5 * x
    total = term
    k = 1
    while True:
        term *= z / (k * (k + order))
        total += term
        if abs(term) <= 1e-18 * abs(total) or k > 500:
            return total
        k += 1


class TestGridProfile:
    def test_grid_endpoints_and_spacing(self):
        g = Grid(51)
        assert g.h == pytest.approx(0.02, abs=0)
        assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
        assert np.allclose(np.diff(g.nodes), g.h, rtol=0, atol=1e-15)

    def test_grid_from_spacing(self):
        assert Grid.from_spacing(0.02).n == 51

    def test_grid_too_small(self):
        with pytest.raises(NumericsError):
            Grid(2)

    def test_profile_length_mismatch(self):
        with pytest.raises(NumericsError):
            Profile(Grid(5), np.zeros(4))

    def test_profile_rejects_nonfinite(self):
        with pytest.raises(NumericsError):
            Profile(Grid(5), np.array([0.0, 1.0, np.nan, 0.0, 0.0]))

    def test_profile_immutable(self):
        p = Profile.zeros(Grid(5))
        with pytest.raises(ValueError):
            p.values[0] = 1.0


class TestQuadrature:
    def test_norm_of_zero(self, grid51):
        assert l2_norm(Profile.zeros(grid51)) == 0.0

    def test_norm_of_ones(self, grid51):
        assert l2_norm(Profile(grid51, np.ones(51))) == pytest.approx(1.0, abs=1e-15)

    def test_norm_of_sine(self, grid51):
        # analytic: integral of sin^2(pi x) over [0, 1] is 1/2
        p = Profile(grid51, np.sin(np.pi * grid51.nodes))
        assert l2_norm(p) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-3)

    def test_inner_product_zero_argument(self, grid51, rng):
        p = smooth_profile(grid51, rng)
        assert inner_product(p, Profile.zeros(grid51)) == 0.0

    def test_inner_product_matches_norm(self, grid51, rng):
        p = smooth_profile(grid51, rng)
        assert inner_product(p, p) == pytest.approx(l2_norm(p) ** 2, rel=1e-12)

    def test_linear_integrand_exact(self, grid51):
        # trapezoid is exact for linear integrands: int_0^1 x dx = 1/2
        p = Profile(grid51, grid51.nodes.copy())
        q = Profile(grid51, np.ones(51))
        assert inner_product(p, q) == pytest.approx(0.5, rel=1e-12)

    def test_grid_mismatch_raises(self):
        with pytest.raises(NumericsError):
            inner_product(Profile.zeros(Grid(11)), Profile.zeros(Grid(21)))

    @given(seed=st.integers(0, 2 ** 31))
    @settings(max_examples=25, deadline=None)
    def test_symmetric_bilinear(self, seed):
        g = Grid(31)
        r = np.random.default_rng(seed)
        p = Profile(g, r.standard_normal(31))
        q = Profile(g, r.standard_normal(31))
        s = Profile(g, r.standard_normal(31))
        a, b = r.standard_normal(2)
        assert inner_product(p, q) == pytest.approx(inner_product(q, p), abs=1e-14)
        combo = Profile(g, a * p.values + b * q.values)
        assert inner_product(combo, s) == pytest.approx(
            a * inner_product(p, s) + b * inner_product(q, s), rel=1e-12, abs=1e-13)


class TestTridiagonal:
    def test_identity(self, rng):
        r = rng.standard_normal(10)
        x = solve_tridiagonal(np.zeros(9), np.ones(10), np.zeros(9), r)
        assert np.array_equal(x, r)

    def test_two_by_two(self):
        # [[2, 1], [1, 2]] @ [1, 1] = [3, 3]
        x = solve_tridiagonal(np.array([1.0]), np.array([2.0, 2.0]),
                              np.array([1.0]), np.array([3.0, 3.0]))
        assert x == pytest.approx([1.0, 1.0], rel=1e-14)

    @given(seed=st.integers(0, 2 ** 31))
    @settings(max_examples=25, deadline=None)
    def test_residual_diagonally_dominant(self, seed):
        r = np.random.default_rng(seed)
        n = 100
        lo = r.standard_normal(n - 1)
        up = r.standard_normal(n - 1)
        row_sum = np.zeros(n)
        row_sum[1:] += np.abs(lo)
        row_sum[:-1] += np.abs(up)
        di = (row_sum + 1.0 + r.random(n)) * np.where(r.random(n) < 0.5, -1.0, 1.0)
        rhs = r.standard_normal(n)
        x = solve_tridiagonal(lo, di, up, rhs)
        resid = di * x
        resid[:-1] += up * x[1:]
        resid[1:] += lo * x[:-1]
        err = np.max(np.abs(resid - rhs)) / np.max(np.abs(rhs))
        assert err <= 1e-12

    def test_zero_pivot_reports_index(self):
        with pytest.raises(ZeroPivotError) as info:
            solve_tridiagonal(np.array([0.0, 0.0]), np.array([1.0, 0.0, 1.0]),
                              np.array([0.0, 0.0]), np.ones(3))
        assert info.value.index == 1

    def test_dimension_mismatch(self):
        with pytest.raises(NumericsError):
            solve_tridiagonal(np.zeros(3), np.ones(3), np.zeros(2), np.ones(3))


class TestBessel:
    def test_values_at_zero(self):
        assert bessel_i0(0.0) == 1.0
        assert bessel_i1(0.0) == 0.0

    def test_i0_at_one(self):
        # series oracle: 1.2660658777520084
        assert bessel_i0(1.0) == pytest.approx(bessel_series_oracle(0, 1.0), abs=1e-9)
        assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, abs=1e-9)

    @pytest.mark.parametrize("order,fn", [(0, bessel_i0), (1, bessel_i1)])
    def test_against_series_oracle(self, order, fn):
        # scaled tolerance: 1e-10 absolute for O(1) values, relative beyond
        xs = np.geomspace(1e-3, 30.0, 40)
        for x in xs:
            ref = bessel_series_oracle(order, float(x))
            assert abs(fn(float(x)) - ref) <= 1e-10 * max(1.0, abs(ref)), f"x={x}"

    @pytest.mark.parametrize("order,fn", [(0, bessel_i0), (1, bessel_i1)])
    def test_against_scipy(self, order, fn):
        iv = pytest.importorskip("scipy.special").iv
        xs = np.geomspace(1e-2, 30.0, 25)
        vals = fn(xs)
        ref = iv(order, xs)
        assert np.all(np.abs(vals - ref) <= 1e-12 * np.maximum(1.0, np.abs(ref)))

    def test_parity(self):
        assert bessel_i0(-2.5) == bessel_i0(2.5)
        assert bessel_i1(-2.5) == -bessel_i1(2.5)

    def test_vectorized(self):
        xs = np.array([0.0, 1.0, 25.0])
        out = bessel_i0(xs)
        assert out.shape == (3,)
        assert out[0] == 1.0

    def test_nonfinite_rejected(self):
        with pytest.raises(NumericsError):
            bessel_i0(float("nan"))
