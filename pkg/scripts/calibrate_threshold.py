"""Refit the constant of the analytic existence threshold.

Measures the Picard-convergence frontier of the nonlinear solver over the
standard (k, Ebar, T) sweep and prints the constant that centres
Z_frontier / Z_max on one. Takes about a minute and a half.

    python3 scripts/calibrate_threshold.py
"""

from zakharov_goursat.analytic import THRESHOLD_CALIBRATION, calibrate_threshold, threshold_comparison
from zakharov_goursat.nonlinear_solver import frontier_sweep


def main():
    frontier = frontier_sweep()
    comps = threshold_comparison(frontier, C_cal=1.0)
    C = calibrate_threshold(comps)
    print(f"{'k':>6} {'Ebar':>6} {'T':>5} {'Z_frontier':>12} {'||E0||':>10}")
    for f, c in zip(frontier, comps):
        print(f"{f.k:6.1f} {f.Ebar:6.2f} {f.T:5.2f} {f.Z:12.5g} {c.E0_norm:10.5g}")
    print(f"fitted C_cal = {C:.4g} (shipped: {THRESHOLD_CALIBRATION:.4g})")
    for c in threshold_comparison(frontier, C_cal=C):
        print(f"k={c.k:g} Ebar={c.Ebar:g} T={c.T:g}: Z_frontier/Z_max = {c.ratio:.3f}")


if __name__ == "__main__":
    main()
