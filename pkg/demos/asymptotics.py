"""Growth exponents of the closed-form tail bounds.

For windows r^(1/d) W the bound behaves like exp(-c r^s); the fitted s is
printed for the volume and for each intrinsic volume V_j with j >= k.
The volume slope is close to 1 - k/d.  For j < d-1 with d - j >= 2 the
higher-order coefficients grow with the window and pull the slope down;
see the README.

    python demos/asymptotics.py
"""
import numpy as np

from cylproc import bounds as bd
from cylproc import geometry as geo
from cylproc.process import ProcessConfig
from cylproc.sampling import RotatedFixed


def main():
    grid = np.logspace(3, 6, 13)
    print(f"{'(d,k)':>6} {'target':>7} {'volume':>7}  intrinsic slopes")
    for d, k in ((2, 1), (3, 1), (3, 2), (4, 2)):
        base = geo.Box(np.zeros(d - k), np.full(d - k, 0.3))
        window = geo.Ball.centered(d, 1.0)
        cfg = ProcessConfig(d, k, 0.5, RotatedFixed(base))
        vol = bd.scaling_exponent_probe(base, window, cfg, grid)
        js = "  ".join(f"j={j}: {bd.scaling_exponent_probe(base, window, cfg, grid, j):.3f}"
                       for j in range(max(k, 1), d))
        print(f"{str((d, k)):>6} {1 - k / d:7.3f} {vol:7.3f}  {js}")


if __name__ == "__main__":
    main()
