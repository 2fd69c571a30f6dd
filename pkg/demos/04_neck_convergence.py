"""How fast does the neck Hessian approach the cylinder value?

At a neckpinch the profile is a cylinder only up to logarithmic corrections:
r^2 ~ 2 (T - t) (1 - 1/log(1/(T - t))).  On a grid the smallest resolved
time-to-pinch is about h^2, so the measured Hessian sits roughly 1/log(1/h)
away from -diag(1, 1, 0).  This script measures it on several grids.
"""

import argparse

import numpy as np

from mcf_arrival import evolve, get_scenario, sample
from mcf_arrival.analysis import find_critical_points
from mcf_arrival.pipeline import select_apex

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--n", type=int, nargs="+", default=[128, 256])
args = parser.parse_args()

rows = []
for n in args.n:
    u, _ = evolve(sample(get_scenario("dumbbell"), n))
    neck = select_apex(find_critical_points(u))
    lam = np.sort(neck.eigenvalues)
    h = u.spec.spacing
    rows.append((h, lam[0], lam[-1]))
    print(f"N={n:4d}  h={h:.4f}  1/log(1/h)={1 / np.log(1 / h):.3f}  "
          f"radial {lam[0]:.3f}  axial {lam[-1]:.3f}  residual {neck.cylinder_residual:.3f}")

if len(rows) >= 2:
    x = np.array([1 / np.log(1 / h) for h, _, _ in rows])
    for col, name, target in [(1, "radial", -1.0), (2, "axial", 0.0)]:
        y = np.array([r[col] for r in rows])
        slope, intercept = np.polyfit(x, y, 1)
        print(f"{name} eigenvalue extrapolated to h -> 0: {intercept:.3f} (cylinder {target})")
