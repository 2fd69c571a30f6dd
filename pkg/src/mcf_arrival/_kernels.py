"""Compiled inner loop for 2D (and axisymmetric) evolution.

Fuses one forward-Euler step of the regularized operator with the crossing
recorder.  Must agree with :func:`mcf_arrival.grid.curvature_rhs_array`;
the test suite checks this node by node.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def step_record_2d(v, out, crossing, h, dt, eps, axisym, rho0, t, t_next, fault):
    nx, ny = v.shape
    inv2h = 1.0 / (2.0 * h)
    invh2 = 1.0 / (h * h)
    inv4h2 = 1.0 / (4.0 * h * h)
    eps2 = eps * eps
    jlo = 0 if axisym else 1
    for i in range(1, nx - 1):
        for j in range(jlo, ny - 1):
            c = v[i, j]
            xp = v[i + 1, j]
            xm = v[i - 1, j]
            yp = v[i, j + 1]
            if j == 0:
                ym = yp
                pp = v[i + 1, j + 1]
                mp = v[i - 1, j + 1]
                pm = pp
                mm = mp
            else:
                ym = v[i, j - 1]
                pp = v[i + 1, j + 1]
                mp = v[i - 1, j + 1]
                pm = v[i + 1, j - 1]
                mm = v[i - 1, j - 1]
            gx = (xp - xm) * inv2h
            gy = (yp - ym) * inv2h
            hxx = (1.0 + fault) * (xp - 2.0 * c + xm) * invh2
            hyy = (1.0 + fault) * (yp - 2.0 * c + ym) * invh2
            hxy = (pp - pm - mp + mm) * inv4h2
            if j == 0 and axisym:
                gy = h * hyy  # off-axis limit of the normal
            rhs = hxx + hyy - (gx * gx * hxx + 2.0 * gx * gy * hxy + gy * gy * hyy) / (
                gx * gx + gy * gy + eps2)
            if axisym:
                rho = rho0 + j * h
                if j == 0:
                    rhs += hyy
                else:
                    rhs += gy / rho
            out[i, j] = c + dt * rhs
    # homogeneous Neumann copy on true boundaries
    for j in range(ny):
        out[0, j] = out[1, j]
        out[nx - 1, j] = out[nx - 2, j]
    for i in range(nx):
        if not axisym:
            out[i, 0] = out[i, 1]
        out[i, ny - 1] = out[i, ny - 2]

    positive = 0
    recross = 0
    vmax = -np.inf
    vmin = np.inf
    bad_i = -1
    bad_j = -1
    for i in range(nx):
        for j in range(ny):
            a = v[i, j]
            b = out[i, j]
            if not np.isfinite(b):
                if bad_i < 0:
                    bad_i = i
                    bad_j = j
                continue
            if b > 0.0:
                positive += 1
                if not np.isnan(crossing[i, j]):
                    recross += 1
            if a > 0.0 and b <= 0.0 and np.isnan(crossing[i, j]):
                crossing[i, j] = t + (t_next - t) * a / (a - b)
            if b > vmax:
                vmax = b
            if b < vmin:
                vmin = b
    return positive, recross, vmax, vmin, bad_i, bad_j
