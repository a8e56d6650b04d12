"""Simulated volume tails against the analytic tail bounds.

Cylinders with one-dimensional axes in R^3 (k=1) and disc bases of
radius 1/2 are sampled in the unit ball.  The empirical exceedance
frequencies of F = vol(Z cap W) around its mean are printed next to the
closed-form bound for randomly rotated bases.

    python demos/tail_bounds.py [n_reps]
"""
import math
import sys

import numpy as np

from cylproc import bounds as bd
from cylproc import geometry as geo
from cylproc import meanvalues as mv
from cylproc.errors import DomainError
from cylproc.process import ProcessConfig, empirical_tail, replicate_volumes
from cylproc.sampling import DeterministicBall, RngStream


def main(n_reps=400):
    cfg = ProcessConfig(3, 1, 0.3, DeterministicBall(0.5, 2))
    window = geo.Ball.centered(3, 1.0)
    values, _ = replicate_volumes(cfg, window, n_reps, 10000, RngStream(1))
    sd = values.std(ddof=1)
    grid = np.linspace(0.0, 3.0 * sd, 10)
    tc = empirical_tail(cfg, window, n_reps, 10000, grid, None, values=values)
    params = bd.rotated_base_params(geo.Ball.centered(2, 0.5), window, cfg)

    print(f"mean volume: simulated {tc.mean_hat:.4f}, exact {mv.mean_volume(cfg, window):.4f}")
    print(f"alpha = {params.alpha:.4f}, beta = {params.beta:.4f}\n")
    print(f"{'r':>7} {'P(F-EF>=r)':>11} {'bound':>9} {'P(F-EF<=-r)':>12} {'bound':>9}")
    for i, r in enumerate(grid):
        up = math.exp(bd.rotated_base_bound(params, r, "upper"))
        try:
            lo = math.exp(bd.rotated_base_bound(params, r, "lower"))
        except DomainError:
            lo = float("nan")
        print(f"{r:7.3f} {tc.upper[i]:11.4f} {up:9.4f} {tc.lower[i]:12.4f} {lo:9.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 400)
