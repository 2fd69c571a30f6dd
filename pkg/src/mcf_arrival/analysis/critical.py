"""Critical points of the arrival time and their cylindrical strata.

At a singular point of type ``S^{n-k} x R^k`` the Hessian of ``u`` is
``-Pi / (n-k)``, with ``Pi`` the projection onto the complement of the
k-dimensional axis.  :func:`classify_stratum` tests a Hessian against each
candidate ``k``; :func:`find_critical_points` locates the points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..arrival import ArrivalField
from ..errors import InvalidParameterError, PartialFieldError
from ..grid import SymmetricMatrix

CLASSIFY_TOL = 0.1


class Stratum(NamedTuple):
    """Outcome of :func:`classify_stratum`; ``k`` is None when unclassified."""

    k: int | None
    residual: float
    best_k: int
    axis_projector: np.ndarray
    complement_projector: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _kernel_split(vals, vecs, k):
    """Indices of the k eigenvalues closest to zero and of the rest."""
    order = np.argsort(np.abs(vals), kind="stable")
    return order[:k], order[k:]


def classify_stratum(hess, n: int, tol: float = CLASSIFY_TOL) -> Stratum:
    """Best cylinder type ``k`` for ``hess``, or ``k=None`` if none fits within ``tol``.

    ``n`` is the hypersurface dimension (ambient dimension - 1).  The
    residual is the Frobenius norm ``||hess + Pi_k / (n-k)||``; ties go to
    the smaller residual, then the smaller ``k``.
    """
    m = np.asarray(hess, dtype=float)
    if m.shape != (n + 1, n + 1):
        raise InvalidParameterError(f"Hessian of shape {m.shape} does not match n={n}")
    if not 0 < tol < 1 / (2 * n):
        raise InvalidParameterError(f"tol must lie in (0, {1 / (2 * n):.4g})")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    eye = np.eye(n + 1)
    best = None
    for k in range(n):
        kern, _ = _kernel_split(vals, vecs, k)
        axis = vecs[:, kern] @ vecs[:, kern].T
        comp = eye - axis
        res = float(np.linalg.norm(m + comp / (n - k)))
        if best is None or res < best[1]:
            best = (k, res, axis, comp)
    k, res, axis, comp = best
    return Stratum(k if res <= tol else None, res, k, axis, comp, vals, vecs)


@dataclass
class CriticalPoint:
    position: np.ndarray
    u_value: float
    hess: SymmetricMatrix
    n: int
    stratum_k: int | None
    axis_projector: np.ndarray = field(repr=False)
    complement_projector: np.ndarray = field(repr=False)
    cylinder_residual: float
    best_k: int = 0  # minimizing stratum even when the residual misses the tolerance
    grad_norm: float = 0.0
    source: int = 0  # index of the meridian/grid detection this point came from

    @classmethod
    def from_hessian(cls, position, u_value, hess, n, tol=CLASSIFY_TOL, grad_norm=0.0, source=0):
        s = classify_stratum(hess, n, tol)
        return cls(np.asarray(position, dtype=float), float(u_value), SymmetricMatrix(hess), n,
                   s.k, s.axis_projector, s.complement_projector, s.residual,
                   s.best_k, float(grad_norm), source)

    @property
    def classified(self) -> bool:
        return self.stratum_k is not None

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.hess.eig()[0]

    def kernel_basis(self) -> np.ndarray:
        """Orthonormal basis (columns) of the axis directions (best-fit k)."""
        k = self.best_k
        vals, vecs = self.hess.eig()
        kern, _ = _kernel_split(vals, vecs, k)
        return vecs[:, kern]

    def complement_basis(self) -> np.ndarray:
        k = self.best_k
        vals, vecs = self.hess.eig()
        _, rest = _kernel_split(vals, vecs, k)
        return vecs[:, rest]


def _local_minima(norm: np.ndarray, axisym: bool) -> np.ndarray:
    """Nodes where ``norm`` is <= every finite neighbour in the 3^d block."""
    d = norm.ndim
    big = np.where(np.isfinite(norm), norm, np.inf)
    p = np.pad(big, 1, constant_values=np.inf)
    if axisym:
        p[:, 0] = p[:, 2]
    centre = p[(slice(1, -1),) * d]
    ok = np.isfinite(centre)
    for off in np.ndindex(*(3,) * d):
        if all(o == 1 for o in off):
            continue
        nb = p[tuple(slice(o, o + s) for o, s in zip(off, norm.shape))]
        ok &= centre <= nb
    return ok


def find_critical_points(u: ArrivalField, tau: float | None = None, tol: float = CLASSIFY_TOL,
                         ring_spacing: float | None = None) -> list[CriticalPoint]:
    """Detect, refine and classify critical points of ``u``.

    Seeds are swept nodes with ``|grad u| <= tau`` (default: one grid
    spacing) that are local minima of ``|grad u|``.  Each seed takes one
    Newton step on ``grad u`` using only the Hessian eigen-directions with
    ``|lambda| > tol``, limited to one cell.  Seeds landing within ``h`` of each
    other are merged.  On axisymmetric grids an off-axis detection is a
    circle in R^3 and is returned as points spaced ``ring_spacing``
    (default ``h``) around it.
    """
    if u.partial:
        raise PartialFieldError("critical points of a partial field are not meaningful")
    spec = u.spec
    h = spec.spacing
    tau = h if tau is None else float(tau)
    ring_spacing = h if ring_spacing is None else float(ring_spacing)
    norm = u.grad_norm_array
    hess_ok = np.all(np.isfinite(u.hess_array.reshape(-1, *spec.shape)), axis=0)
    seeds = np.argwhere((norm <= tau) & hess_ok & _local_minima(norm, spec.axisymmetric))

    refined = []
    for idx in seeds:
        x0 = spec.position(idx)
        g = u.grad_array[(slice(None),) + tuple(idx)]
        hm = u.hess_array[(slice(None), slice(None)) + tuple(idx)]
        vals, vecs = np.linalg.eigh(0.5 * (hm + hm.T))
        step = np.zeros(spec.dimension)
        for lam, vec in zip(vals, vecs.T):
            if abs(lam) > tol:
                step -= (vec @ g) / lam * vec
        length = np.linalg.norm(step)
        if length > h:
            step *= h / length
        x = x0 + step
        if spec.axisymmetric:
            x[1] = max(x[1], 0.0)
        amb = _ambient(u, x)
        gn = float(np.linalg.norm(u.gradient(amb)))
        if not np.isfinite(gn):  # refinement left the stencil-valid region
            x, amb = x0, _ambient(u, x0)
            gn = float(norm[tuple(idx)])
        refined.append((gn, x))

    refined.sort(key=lambda item: item[0])
    kept: list[tuple[float, np.ndarray]] = []
    for gn, x in refined:
        if all(np.linalg.norm(x - y) > h * (1 + 1e-9) for _, y in kept):
            kept.append((gn, x))
    # deterministic order: row-major on the refined grid position
    kept.sort(key=lambda item: tuple(item[1]))

    n = u.n
    points = []
    for source, (gn, x) in enumerate(kept):
        if spec.axisymmetric and x[1] > 0.5 * h:
            count = max(8, int(np.ceil(2 * np.pi * x[1] / ring_spacing)))
            phi = 2 * np.pi * np.arange(count) / count
            amb = np.stack([np.full(count, x[0]), x[1] * np.cos(phi), x[1] * np.sin(phi)], -1)
        else:
            if spec.axisymmetric:
                x = np.array([x[0], 0.0])
            amb = _ambient(u, x)[None, :]
        vals = u.value(amb)
        hs = u.hessian(amb)
        for p, val, hm in zip(amb, vals, hs):
            if not (np.isfinite(val) and np.all(np.isfinite(hm))):
                continue
            points.append(CriticalPoint.from_hessian(p, val, hm, n, tol, gn, source))
    return points


def _ambient(u: ArrivalField, x: np.ndarray) -> np.ndarray:
    if u.spec.axisymmetric:
        return np.array([x[0], x[1], 0.0])
    return np.asarray(x, dtype=float)
