"""Stability constants and the guaranteed decay envelope.

The guaranteed transform bound G grows exponentially in the reaction bound,
so the sufficient stability condition only bites for slowly varying, mildly
unstable coefficients. In that regime the simulated norm stays under the
envelope G exp(-sigma t); for the strongly unstable example coefficient the
condition fails by two hundred orders of magnitude even though the
simulation decays, which the report states explicitly.
"""

import math

import numpy as np

from etgsim import (Actuation, CoefficientSpec, Grid, KernelSolverKind,
                    PlantConfig, SimConfig, TriggerParams,
                    build_stability_report, check_decay_envelope,
                    initial_profile, run_closed_loop)
from etgsim.io import write_columns

MU = math.pi ** 2

print("== slowly varying regime (amplitude 0.25, rate bound 1) ==")
report = build_stability_report(lambda_bar=0.5, c=0.0, epsilon=1.0,
                                phi=1.0, R=0.5, mu=MU)
for line in report.lines():
    print("  " + line)

cfg = SimConfig(
    n=51, dt=4e-4, horizon=2.0,
    plant=PlantConfig(epsilon=1.0, q=math.inf, actuation=Actuation.DIRICHLET, c=0.0),
    coefficient=CoefficientSpec("slow-sine", {
        "amplitude": 0.25, "rate": 2.0, "spatial_amplitude": 0.25,
        "lambda_bar": 0.5, "phi": 1.0}),
    trigger=TriggerParams.static(R=0.5, mu=MU),
    kernel_solver=KernelSolverKind.NUMERIC, kernel_refine=4)
result = run_closed_loop(cfg, initial_profile(Grid(51), "bump"))
envelope = report.G * np.exp(-report.sigma * result.times) * result.l2_norms[0]
holds = check_decay_envelope(result.times, result.l2_norms, report.G, report.sigma)
print(f"\n  simulated norm below G exp(-sigma t) at every recorded time: {holds}")
print(f"  worst norm/envelope ratio: {np.max(result.l2_norms / envelope):.3f}")

write_columns("demo_out/envelope.csv", ["t", "l2_norm", "envelope"],
              [result.times, result.l2_norms, envelope])
print("  wrote demo_out/envelope.csv")

print("\n== strongly unstable example coefficient (bound 117, rate bound 303) ==")
report_ref = build_stability_report(lambda_bar=117.0, c=0.0, epsilon=1.0,
                                    phi=303.0, R=0.15, mu=MU)
for line in report_ref.lines():
    print("  " + line)
print("  (simulations with this coefficient decay regardless; the guarantee "
      "is conservative)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy(result.times, np.maximum(result.l2_norms, 1e-16), label="simulated norm")
    ax.semilogy(result.times, envelope, "--", label="guaranteed envelope")
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    fig.savefig("demo_out/envelope.png", dpi=150)
    print("\nwrote demo_out/envelope.png")
except ImportError:
    print("\nmatplotlib not installed; skipping the plot")
