"""Gain kernels two ways: successive approximations vs the Bessel closed form.

The controller gain is the kernel K(x, y) of a Volterra transform, solved on
the triangle 0 <= y <= x <= 1 from the frozen reaction profile. For the
bump-plus-cosine example coefficient the kernel has a closed form in modified
Bessel functions, which makes a sharp cross-check for the numeric solver.
"""

import numpy as np

from etgsim import (Grid, make_coefficient, sample_coefficient,
                    solve_kernel_closed_form, solve_kernel_numeric,
                    transform_bound)
from etgsim.io import write_csv
from etgsim.backstepping import kernel_rows

grid = Grid(51)
coeff = make_coefficient("paper-example")

print("solving kernels for the example coefficient frozen at three times\n")
for t_j in (0.0, 0.8, 1.0):
    b = sample_coefficient(coeff, t_j, grid)
    numeric = solve_kernel_numeric(b, 0.0, 1.0, grid)
    closed = solve_kernel_closed_form(coeff.time_offset(t_j), grid)
    dev = np.max(np.abs(numeric.table - closed.table)) / np.max(np.abs(closed.table))
    print(f"t_j = {t_j:4.2f}: lambda_tilde = {coeff.time_offset(t_j):7.3f}, "
          f"{numeric.iterations} sweeps, final increment {numeric.final_increment:.1e}, "
          f"sup relative deviation vs closed form {dev:.2e}")
    print(f"          transform norm bound 1 + ||K||_L2 = {transform_bound(numeric):.3f}")

b0 = sample_coefficient(coeff, 0.0, grid)
k0 = solve_kernel_numeric(b0, 0.0, 1.0, grid)
write_csv("demo_out/kernel_t0.csv", ["x", "y", "K"], kernel_rows(k0))
print("\nwrote demo_out/kernel_t0.csv (x, y, K rows of the t=0 kernel)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    table = np.where(np.tri(51, dtype=bool), k0.table, np.nan)
    im = ax.imshow(table, origin="lower", extent=(0, 1, 0, 1), aspect="auto")
    ax.set_xlabel("y")
    ax.set_ylabel("x")
    ax.set_title("gain kernel K(x, y) at t = 0")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig("demo_out/kernel_t0.png", dpi=150)
    print("wrote demo_out/kernel_t0.png")
except ImportError:
    print("matplotlib not installed; skipping the plot")
