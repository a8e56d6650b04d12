"""Mean intrinsic volumes of the union set inside a window.

Evaluates the closed form and the alternating series for every admissible
j, then recovers the classical Euler-characteristic density of a planar
Boolean model of discs from the closed form on growing square windows.

    python demos/mean_values.py
"""
import math

import numpy as np

from cylproc import geometry as geo
from cylproc import meanvalues as mv
from cylproc.process import ProcessConfig
from cylproc.sampling import DeterministicBall


def main():
    cfg = ProcessConfig(4, 1, 0.5, DeterministicBall(0.5, 3))
    window = geo.Box.from_edges([1.0, 1.0, 1.0, 1.0])
    print("d=4, k=1, unit cube window, ball bases of radius 1/2")
    print(f"{'j':>2} {'closed':>14} {'series':>14} {'last term':>10}")
    for j in range(1, 5):
        c = mv.mean_intrinsic_closed(cfg, window, j)
        s = mv.mean_intrinsic_series(cfg, window, j)
        print(f"{j:2d} {c.value:14.10f} {s.value:14.10f} {s.tail_estimate:10.2e}")

    rho, gamma = 0.3, 1.7
    disc = ProcessConfig(2, 0, gamma, DeterministicBall(rho, 2))
    ts = np.array([1.0, 2.0, 3.0])
    ys = [mv.mean_intrinsic_closed(disc, geo.Box.from_edges([t, t]), 0).value for t in ts]
    lead = np.polyfit(ts, ys, 2)[0]
    area = math.pi * rho ** 2
    classical = math.exp(-gamma * area) * (gamma - gamma ** 2 * math.pi * rho ** 2)
    print(f"\nEuler characteristic per unit area: {lead:.12f} (classical {classical:.12f})")


if __name__ == "__main__":
    main()
