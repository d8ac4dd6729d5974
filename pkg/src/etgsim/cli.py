"""Command-line front end: run, tables, kernel, and analyze subcommands.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime or
numerical failure. All outputs are CSV (plus a short text report for
analyze); plotting is left to external tools.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import build_stability_report
from .backstepping import (kernel_rows, solve_kernel_closed_form,
                           solve_kernel_numeric, trace_target)
from .closedloop import SimulationError, batch_run, initial_profile, run_closed_loop
from .config import ConfigError, RunManifest, TableSweep, load_config
from .io import write_columns, write_csv
from .plant import sample_coefficient
from .trigger import TriggerParams


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="etgsim",
        description="Event-triggered gain-scheduled boundary control simulator")
    parser.add_argument("subcommand", choices=["run", "tables", "kernel", "analyze"])
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for batch sweeps")
    parser.add_argument("--stride", type=int, default=None,
                        help="override the recording stride")
    args = parser.parse_args(argv)

    try:
        sim, profile_name, sweep = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.stride is not None:
        if args.stride < 1:
            print("config error: stride must be at least 1", file=sys.stderr)
            return 1
        sim = replace(sim, record_stride=args.stride)

    out = Path(args.out)
    manifest = RunManifest(config_path=str(args.config), out_dir=str(out),
                           subcommand=args.subcommand, initial_profile=profile_name,
                           tables=sweep)
    try:
        if args.subcommand == "run":
            _cmd_run(sim, profile_name, out, manifest)
        elif args.subcommand == "tables":
            if sweep is None:
                print("config error: tables subcommand needs a [tables] section",
                      file=sys.stderr)
                return 1
            workers = max(args.workers, sweep.workers)
            _cmd_tables(sim, sweep, workers, out, manifest)
        elif args.subcommand == "kernel":
            _cmd_kernel(sim, out, manifest)
        else:
            _cmd_analyze(sim, out, manifest)
    except (SimulationError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _write_manifest(out: Path, manifest: RunManifest) -> None:
    write_csv(out / "manifest.csv",
              ["key", "value"],
              [["subcommand", manifest.subcommand],
               ["config_path", manifest.config_path],
               ["out_dir", manifest.out_dir],
               ["initial_profile", manifest.initial_profile],
               ["deterministic", str(manifest.deterministic).lower()]])


def _events_rows(events: np.ndarray):
    rows = [[0, 0.0, "nan"]]
    prev = 0.0
    for j, t in enumerate(events, start=1):
        rows.append([j, t, t - prev])
        prev = t
    return rows


def _cmd_run(sim, profile_name: str, out: Path, manifest: RunManifest) -> None:
    grid = sim.grid()
    result = run_closed_loop(sim, initial_profile(grid, profile_name))

    coeff = sim.coefficient.build()
    report = build_stability_report(coeff.lambda_bar, sim.plant.c, sim.plant.epsilon,
                                    coeff.phi, sim.trigger.R, sim.trigger.mu)
    if report.condition_holds and not report.condition_vacuous:
        envelope = report.G * np.exp(-report.sigma * result.times) * result.l2_norms[0]
        write_columns(out / "norms.csv", ["t", "l2_norm", "envelope"],
                      [result.times, result.l2_norms, envelope])
    else:
        write_columns(out / "norms.csv", ["t", "l2_norm"],
                      [result.times, result.l2_norms])
    write_columns(out / "control.csv", ["t", "U"], [result.times, result.control])
    write_csv(out / "events.csv", ["j", "t_j", "inter_execution_time"],
              _events_rows(result.events))
    if result.m_trace is not None:
        write_columns(out / "m.csv", ["t", "m"], [result.times, result.m_trace])
    _write_manifest(out, manifest)
    stats = result.event_stats()
    print(f"run complete: {result.event_count()} events after t=0, "
          f"final norm ratio {result.l2_norms[-1] / max(result.l2_norms[0], 1e-300):.3e}")
    if stats.defined:
        print(f"mean inter-execution {stats.mean_inter_execution:.4f}, "
              f"cv {stats.coefficient_of_variation:.4f}")


def _sweep_trigger(base: TriggerParams, variant, R: float, eta: float) -> TriggerParams:
    if variant[0] == "static":
        return TriggerParams.static(R=R, mu=base.mu)
    return TriggerParams.dynamic(R=R, mu=base.mu, theta=variant[1], eta=eta)


def _variant_label(variant) -> str:
    return "static" if variant[0] == "static" else f"dynamic theta={variant[1]:g}"


def _cmd_tables(sim, sweep: TableSweep, workers: int, out: Path,
                manifest: RunManifest) -> None:
    header = ["variant"] + [f"R={R:g} eta={eta:g}" for R, eta in sweep.columns]
    count_rows, mean_rows, cv_rows = [], [], []
    pooled_for_hist: dict[str, np.ndarray] = {}
    for variant in sweep.variants:
        label = _variant_label(variant)
        counts, means, cvs = [label], [label], [label]
        for R, eta in sweep.columns:
            try:
                cfg = replace(sim, trigger=_sweep_trigger(sim.trigger, variant, R, eta))
                stats = batch_run(cfg, sweep.runs, workers=workers)
                pooled = stats.pooled_stats()
                counts.append(stats.mean_count)
                means.append(pooled.mean_inter_execution if pooled.defined else "nan")
                cvs.append(pooled.coefficient_of_variation if pooled.defined else "nan")
                pooled_for_hist[f"{label} R={R:g}"] = stats.pooled_gaps
                print(f"{label:22s} R={R:g}: mean events {stats.mean_count:.2f} "
                      f"(+1 with the t=0 sample)")
            except (SimulationError, ValueError) as exc:
                counts.append(f"ERROR {exc}")
                means.append("ERROR")
                cvs.append("ERROR")
        count_rows.append(counts)
        mean_rows.append(means)
        cv_rows.append(cvs)
    write_csv(out / "table_event_counts.csv", header, count_rows)
    write_csv(out / "table_mean_inter_execution.csv", header, mean_rows)
    write_csv(out / "table_cv_inter_execution.csv", header, cv_rows)
    _write_histograms(out / "inter_execution_histogram.csv", pooled_for_hist,
                      sweep.histogram_bins)
    _write_manifest(out, manifest)


def _write_histograms(path, pooled: dict[str, np.ndarray], bins: int) -> None:
    gaps = [g for g in pooled.values() if len(g)]
    if not gaps:
        write_csv(path, ["variant", "bin_low", "bin_high", "count"], [])
        return
    lo = min(g.min() for g in gaps)
    hi = max(g.max() for g in gaps)
    edges = np.geomspace(max(lo, 1e-6), hi * (1 + 1e-12), bins + 1)
    rows = []
    for label, g in pooled.items():
        hist, _ = np.histogram(g, bins=edges)
        for b in range(bins):
            rows.append([label, edges[b], edges[b + 1], int(hist[b])])
    write_csv(path, ["variant", "bin_low", "bin_high", "count"], rows)


def _cmd_kernel(sim, out: Path, manifest: RunManifest) -> None:
    grid = sim.grid()
    coeff = sim.coefficient.build()
    b = sample_coefficient(coeff, 0.0, grid)
    numeric = solve_kernel_numeric(b, sim.plant.c, sim.plant.epsilon, grid,
                                   tol=sim.kernel_tol, max_iter=sim.kernel_max_iter,
                                   q=sim.plant.q, actuation=sim.plant.actuation,
                                   refine=sim.kernel_refine)
    write_csv(out / "kernel.csv", ["x", "y", "K"], kernel_rows(numeric))

    trace_residual = float(np.max(np.abs(
        numeric.table[np.arange(grid.n), np.arange(grid.n)]
        - trace_target(b, sim.plant.c, sim.plant.epsilon))))
    diag_rows = [["iterations", numeric.iterations],
                 ["final_increment", numeric.final_increment],
                 ["trace_residual", trace_residual]]

    closed_ok = (sim.coefficient.name == "paper-example" and sim.plant.c == 0.0
                 and sim.plant.epsilon == 1.0 and math.isinf(sim.plant.q))
    if closed_ok:
        closed = solve_kernel_closed_form(coeff.time_offset(0.0), grid,
                                          actuation=sim.plant.actuation)
        dev = (np.max(np.abs(numeric.table - closed.table))
               / max(np.max(np.abs(closed.table)), 1e-300))
        diag_rows.append(["closed_form_sup_relative_deviation", float(dev)])
        print(f"closed-form agreement: sup relative deviation {dev:.3e}")
    write_csv(out / "kernel_diagnostics.csv", ["quantity", "value"], diag_rows)
    _write_manifest(out, manifest)
    print(f"kernel solved in {numeric.iterations} sweeps, "
          f"final increment {numeric.final_increment:.3e}, "
          f"trace residual {trace_residual:.3e}")


def _cmd_analyze(sim, out: Path, manifest: RunManifest) -> None:
    coeff = sim.coefficient.build()
    report = build_stability_report(coeff.lambda_bar, sim.plant.c, sim.plant.epsilon,
                                    coeff.phi, sim.trigger.R, sim.trigger.mu)
    write_csv(out / "stability_report.csv", ["quantity", "value"],
              [["lambda_bar", report.lambda_bar], ["c", report.c],
               ["epsilon", report.epsilon], ["phi", report.phi],
               ["R", report.R], ["mu", report.mu],
               ["G", report.G], ["G_overflowed", str(report.G_overflowed).lower()],
               ["tau", report.tau if report.tau is not None else "nan"],
               ["condition_holds", str(report.condition_holds).lower()],
               ["condition_vacuous", str(report.condition_vacuous).lower()],
               ["sigma", report.sigma if report.sigma is not None else "nan"]])
    (out / "stability_report.txt").write_text("\n".join(report.lines()) + "\n")
    _write_manifest(out, manifest)
    for line in report.lines():
        print(line)


if __name__ == "__main__":
    sys.exit(main())
