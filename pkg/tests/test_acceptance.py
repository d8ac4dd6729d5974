"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The batch criteria (4 and 5) compare event statistics over the 100-member
initial-condition family against frozen reference targets at the stated
tolerances. Heavy fixtures are session-scoped; the whole module runs in a
few minutes on one core.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

import conftest
from etgsim import (Actuation, CoefficientSpec, Grid, KernelSolverKind,
                    PlantConfig, Profile, SimConfig, TriggerMode, TriggerParams,
                    batch_run, check_decay_envelope, initial_profile, l2_norm,
                    make_coefficient, min_dwell_time, paper_sim_config,
                    run_closed_loop, sample_coefficient, solve_inverse_kernel,
                    solve_kernel_closed_form, solve_kernel_numeric,
                    stability_condition, transform_bound_G, direct_transform,
                    inverse_transform)

MU = math.pi ** 2


def report(criterion: str, passed: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def envelope_sim_config(n: int = 51) -> SimConfig:
    """Theorem-valid regime: slow coefficient, R = 1/2, numeric kernels."""
    return SimConfig(
        n=n, dt=4e-4, horizon=2.0,
        plant=PlantConfig(epsilon=1.0, q=math.inf, actuation=Actuation.DIRICHLET, c=0.0),
        coefficient=CoefficientSpec("slow-sine", {
            "amplitude": 0.25, "rate": 2.0, "spatial_amplitude": 0.25,
            "lambda_bar": 0.5, "phi": 1.0}),
        trigger=TriggerParams.static(R=0.5, mu=MU),
        kernel_solver=KernelSolverKind.NUMERIC, kernel_refine=4)


def dwell_sim_config(mode: str = "static", theta: float = 0.05) -> SimConfig:
    """Regime whose guaranteed dwell time exceeds the step: small R, slow drift."""
    trig = (TriggerParams.static(R=0.0125, mu=MU) if mode == "static"
            else TriggerParams.dynamic(R=0.0125, mu=MU, theta=theta))
    return SimConfig(
        n=51, dt=4e-4, horizon=1.6,
        plant=PlantConfig(epsilon=1.0, q=math.inf, actuation=Actuation.DIRICHLET, c=0.0),
        coefficient=CoefficientSpec("slow-sine", {
            "amplitude": 0.15, "rate": 2.0, "phase": -math.pi / 2.0,
            "offset": 0.15, "spatial_amplitude": 0.0}),
        trigger=trig, kernel_solver=KernelSolverKind.NUMERIC, kernel_refine=2,
        record_supervision=True)


@pytest.fixture(scope="session")
def static_run_R015():
    cfg = replace(paper_sim_config(R=0.15), record_supervision=True)
    return run_closed_loop(cfg, initial_profile(Grid(51), "bump"))


@pytest.fixture(scope="session")
def batch_static_R015():
    return batch_run(paper_sim_config(R=0.15), 100)


@pytest.fixture(scope="session")
def batch_static_R05():
    return batch_run(paper_sim_config(R=0.5), 100)


@pytest.fixture(scope="session")
def batch_dynamic_R015():
    return batch_run(paper_sim_config(mode=TriggerMode.DYNAMIC, R=0.15,
                                      eta=16.7, theta=0.015), 100)


@pytest.fixture(scope="session")
def batch_dynamic_R05():
    return batch_run(paper_sim_config(mode=TriggerMode.DYNAMIC, R=0.5,
                                      eta=9.86, theta=0.015), 100)


class TestCriterion1KernelCrossValidation:
    def test_numeric_matches_closed_form(self, grid51, bump_coeff):
        worst_dev = 0.0
        worst_time = 0.0
        for t_j in (0.0, 0.8, 1.0):
            b = sample_coefficient(bump_coeff, t_j, grid51)
            t0 = time.perf_counter()
            numeric = solve_kernel_numeric(b, 0.0, 1.0, grid51, tol=1e-10)
            elapsed = time.perf_counter() - t0
            closed = solve_kernel_closed_form(bump_coeff.time_offset(t_j), grid51)
            dev = (np.max(np.abs(numeric.table - closed.table))
                   / np.max(np.abs(closed.table)))
            worst_dev = max(worst_dev, dev)
            worst_time = max(worst_time, elapsed)
        ok = worst_dev <= 1e-4 and worst_time <= 1.0
        report("1 (kernel cross-validation)", ok,
               f"sup relative deviation {worst_dev:.2e} (tol 1e-4), "
               f"slowest solve {worst_time:.2f} s (limit 1 s)")
        assert worst_dev <= 1e-4
        assert worst_time <= 1.0


class TestCriterion2TransformComposition:
    def test_composition_identity(self, grid51):
        coeff = make_coefficient("slow-sine", {
            "amplitude": 0.25, "rate": 2.0, "spatial_amplitude": 0.25,
            "lambda_bar": 0.5, "phi": 1.0})
        b = sample_coefficient(coeff, 0.0, grid51)
        rng = np.random.default_rng(815)
        t0 = time.perf_counter()
        direct = solve_kernel_numeric(b, 0.0, 1.0, grid51, refine=4)
        inverse = solve_inverse_kernel(b, 0.0, 1.0, grid51, refine=4)
        worst = 0.0
        for _ in range(20):
            u = conftest.smooth_profile(grid51, rng)
            back = inverse_transform(inverse, direct_transform(direct, u))
            worst = max(worst, l2_norm(Profile(grid51, back.values - u.values))
                        / l2_norm(u))
        elapsed = time.perf_counter() - t0
        ok = worst <= 1e-6 and elapsed <= 1.0
        report("2 (transform composition)", ok,
               f"worst relative error {worst:.2e} (tol 1e-6) over 20 profiles "
               f"in {elapsed:.2f} s (limit 1 s)")
        assert worst <= 1e-6
        assert elapsed <= 1.0


class TestCriterion3ClosedLoopDecay:
    def test_reference_decay(self, static_run_R015):
        res = static_run_R015
        ratio = res.l2_norms[-1] / res.l2_norms[0]
        finite = bool(np.all(np.isfinite(res.l2_norms)))
        ok = ratio <= 1e-2 and finite
        report("3 (closed-loop decay)", ok,
               f"|u[2]|/|u[0]| = {ratio:.2e} (tol 1e-2), all norms finite: {finite}")
        assert finite
        assert ratio <= 1e-2


class TestCriterion4EventCountTables:
    def test_mean_event_counts(self, batch_static_R015, batch_dynamic_R015,
                               batch_static_R05):
        cases = [
            ("static R=0.15 eta=16.7", batch_static_R015, 39.93),
            ("dynamic R=0.15 theta=0.015", batch_dynamic_R015, 17.01),
            ("static R=0.5", batch_static_R05, 18.58),
        ]
        failures = []
        details = []
        for label, stats, target in cases:
            measured = stats.mean_count
            dev = abs(measured - target) / target
            details.append(f"{label}: measured {measured:.2f} "
                           f"(with t=0 sample {stats.mean_count_with_origin:.2f}) "
                           f"vs target {target} ({dev:+.0%})")
            if dev > 0.15:
                failures.append(details[-1])
        report("4 (event-count tables)", not failures, "; ".join(details))
        assert not failures, (
            "mean event counts outside +/-15% of the reference targets: "
            + "; ".join(failures))


class TestCriterion5InterExecutionTables:
    def test_inter_execution_statistics(self, batch_static_R015, batch_dynamic_R05):
        failures = []
        details = []
        pooled = batch_static_R015.pooled_stats()
        dev = abs(pooled.mean_inter_execution - 0.0460) / 0.0460
        details.append(f"static R=0.15 mean gap {pooled.mean_inter_execution:.4f} "
                       f"vs 0.0460 ({dev:+.0%}, tol 20%)")
        if dev > 0.20:
            failures.append(details[-1])
        dev_cv = abs(pooled.coefficient_of_variation - 1.9814) / 1.9814
        details.append(f"static R=0.15 cv {pooled.coefficient_of_variation:.4f} "
                       f"vs 1.9814 ({dev_cv:+.0%}, tol 25%)")
        if dev_cv > 0.25:
            failures.append(details[-1])
        pooled_dyn = batch_dynamic_R05.pooled_stats()
        if pooled_dyn.defined:
            dev_dyn = abs(pooled_dyn.mean_inter_execution - 0.1112) / 0.1112
            details.append(f"dynamic R=0.5 theta=0.015 mean gap "
                           f"{pooled_dyn.mean_inter_execution:.4f} vs 0.1112 "
                           f"({dev_dyn:+.0%}, tol 20%)")
            if dev_dyn > 0.20:
                failures.append(details[-1])
        else:
            details.append("dynamic R=0.5 theta=0.015: too few events for statistics")
            failures.append(details[-1])
        report("5 (inter-execution tables)", not failures, "; ".join(details))
        assert not failures, (
            "inter-execution statistics outside tolerance: " + "; ".join(failures))


class TestCriterion6PropertySuite:
    def test_a_filter_state_nonnegative(self):
        cfg = replace(paper_sim_config(mode=TriggerMode.DYNAMIC, R=0.15,
                                       eta=16.7, theta=0.15),
                      record_supervision=True)
        res = run_closed_loop(cfg, initial_profile(Grid(51), "bump"))
        dwell = run_closed_loop(dwell_sim_config("dynamic"),
                                initial_profile(Grid(51), "bump"))
        worst = min(res.supervision["m"].min(), dwell.supervision["m"].min())
        ok = worst >= -1e-14
        # between events the filtered inequality lhs - mu R n^2 <= m / theta holds
        for r, theta in ((res, 0.15), (dwell, 0.05)):
            sup = r.supervision
            quiet = ~sup["fired"]
            ok = ok and bool(np.all(sup["margin"][quiet] <= sup["m"][quiet] / theta))
        report("6a (filter state nonnegative)", ok,
               f"min m over every dynamic step = {worst:.2e} (floor -1e-14); "
               f"filtered inequality holds between events: {ok}")
        assert ok

    def test_b_dwell_time_respected(self):
        cfg = dwell_sim_config("static")
        coeff = cfg.coefficient.build()
        G = transform_bound_G(coeff.lambda_bar, cfg.plant.c, cfg.plant.epsilon).value
        tau = min_dwell_time(coeff.phi, cfg.trigger.mu, cfg.trigger.R, G)
        assert tau > cfg.dt, "configuration must make the bound nontrivial"
        res = run_closed_loop(cfg, initial_profile(Grid(51), "bump"))
        gaps = res.inter_execution_times()
        assert len(gaps) >= 2, "configuration must produce events"
        ok = bool(np.all(gaps >= tau))
        report("6b (minimal dwell time)", ok,
               f"tau = {tau:.4f} > dt; {len(gaps)} gaps, min gap = {gaps.min():.4f}")
        assert ok

    def test_c_dynamic_first_event_not_earlier(self):
        pairs = []
        s = run_closed_loop(dwell_sim_config("static"), initial_profile(Grid(51), "bump"))
        d = run_closed_loop(dwell_sim_config("dynamic"), initial_profile(Grid(51), "bump"))
        pairs.append(("dwell regime", s.events[0], d.events[0]))
        sp = run_closed_loop(paper_sim_config(R=0.15, horizon=1.0),
                             initial_profile(Grid(51), "bump"))
        dp = run_closed_loop(paper_sim_config(mode=TriggerMode.DYNAMIC, R=0.15,
                                              eta=16.7, theta=0.15, horizon=1.0),
                             initial_profile(Grid(51), "bump"))
        pairs.append(("reference regime", sp.events[0], dp.events[0]))
        dt = 4e-4
        ok = all(t_dyn >= t_stat - dt * (1 + 1e-9) for _, t_stat, t_dyn in pairs)
        detail = "; ".join(f"{name}: static {ts:.4f}, dynamic {td:.4f}"
                           for name, ts, td in pairs)
        report("6c (dynamic fires no earlier)", ok, detail)
        assert ok

    def test_d_huge_theta_limit_matches_static(self):
        static = run_closed_loop(paper_sim_config(R=0.15, horizon=0.75),
                                 initial_profile(Grid(51), "bump"))
        limit = run_closed_loop(paper_sim_config(mode=TriggerMode.DYNAMIC, R=0.15,
                                                 eta=16.7, theta=1e9, horizon=0.75),
                                initial_profile(Grid(51), "bump"))
        diff = abs(limit.events[0] - static.events[0])
        ok = diff <= 4e-4 * (1 + 1e-9)
        report("6d (theta to infinity limit)", ok,
               f"first events {static.events[0]:.4f} vs {limit.events[0]:.4f} "
               f"(|diff| = {diff:.2e}, one step allowed)")
        assert ok

    def test_e_static_condition_between_events(self, static_run_R015):
        sup = static_run_R015.supervision
        margins = sup["margin"][~sup["fired"]]
        worst = margins.max() if len(margins) else 0.0
        ok = worst <= 0.0
        report("6e (static condition between events)", ok,
               f"max margin at non-firing steps = {worst:.2e} (must be <= 0)")
        assert ok


class TestCriterion7StabilityEnvelope:
    def test_envelope_in_theorem_regime(self):
        # arithmetic oracles, computed before the simulation
        G_oracle = 1.0 + math.sqrt(0.125 * (math.exp(2.0) - 1.0))
        sigma_oracle = (MU ** 2 * 0.25 - G_oracle ** 2 * math.log(G_oracle)) / (MU * 0.5)
        assert G_oracle == pytest.approx(1.89366, abs=5e-5)
        assert sigma_oracle == pytest.approx(4.4707, abs=2.5e-4)

        cfg = envelope_sim_config()
        G_lib = transform_bound_G(0.5, 0.0, 1.0)
        assert not G_lib.overflowed
        assert G_lib.value == pytest.approx(G_oracle, rel=1e-14)

        t0 = time.perf_counter()
        res = run_closed_loop(cfg, initial_profile(Grid(51), "bump"))
        elapsed = time.perf_counter() - t0
        holds = check_decay_envelope(res.times, res.l2_norms, G_oracle, sigma_oracle)

        # the strongly unstable reference coefficient violates the sufficient
        # condition by a wide margin: reported, not hidden
        G_ref = transform_bound_G(117.0, 0.0, 1.0)
        ref_violates = (not stability_condition(303.0, MU, 0.15, G_ref.value)
                        and G_ref.value > 1e100)

        ok = holds and ref_violates and elapsed <= 30.0
        report("7 (stability envelope)", ok,
               f"G = {G_lib.value:.5f}, sigma = {sigma_oracle:.4f}, envelope holds: "
               f"{holds}; reference coefficient violates the condition "
               f"(G ~ {G_ref.value:.1e}): {ref_violates}; run {elapsed:.1f} s")
        assert holds
        assert ref_violates
        assert elapsed <= 30.0


class TestCriterion8Convergence:
    @staticmethod
    def interior_residual(n: int) -> float:
        grid = Grid(n)
        coeff = make_coefficient("paper-example")
        b = sample_coefficient(coeff, 0.0, grid)
        k = solve_kernel_numeric(b, 0.0, 1.0, grid, refine=4)
        h = grid.h
        t = k.table
        worst = 0.0
        for i in range(2, n - 1):
            cols = np.arange(1, i - 1)
            if len(cols) == 0:
                continue
            kxx = (t[i + 1, cols] - 2 * t[i, cols] + t[i - 1, cols]) / h ** 2
            kyy = (t[i, cols + 1] - 2 * t[i, cols] + t[i, cols - 1]) / h ** 2
            worst = max(worst, np.max(np.abs(kxx - kyy - b.values.values[cols] * t[i, cols])))
        return worst

    def test_residual_and_end_to_end_consistency(self):
        coarse = self.interior_residual(51)
        fine = self.interior_residual(101)
        reduction = coarse / fine

        # end-to-end: halving h at fixed dt in the theorem-valid regime
        ratios = {}
        for n in (51, 101):
            cfg = envelope_sim_config(n=n)
            res = run_closed_loop(cfg, initial_profile(Grid(n), "bump"))
            ratios[n] = res.l2_norms[-1] / res.l2_norms[0]
        change = abs(ratios[101] - ratios[51]) / ratios[51]

        ok = reduction >= 1.8 and change <= 0.05
        report("8 (numerical convergence)", ok,
               f"interior residual reduction x{reduction:.2f} (need >= 1.8); "
               f"|u[2]| change across h-halving {change:.2%} (tol 5%)")
        assert reduction >= 1.8
        assert change <= 0.05
