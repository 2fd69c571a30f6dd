"""Local diagnostics around a critical point and the level-set frame probe.

Every sampler draws directions from a scrambled Halton sequence with a fixed
seed, so repeated runs give identical numbers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ..arrival import GRAD_FLOOR, ArrivalField, eq12_residual, residual_map
from ..errors import (EmptyShellError, InvalidParameterError, NearCriticalError,
                      NoInteriorMaxError, PreconditionError)
from ..grid import SymmetricMatrix
from .critical import CriticalPoint

DEFAULT_RADII = (0.2, 0.1, 0.05)
DEFAULT_SAMPLES = 512
ALIGN_TOL = 0.05
EQ12_REJECT = 0.5


@dataclass(frozen=True)
class ConeSpec:
    apex: CriticalPoint
    aperture: float = 1.0
    radii: tuple[float, ...] = DEFAULT_RADII
    samples: int = DEFAULT_SAMPLES
    seed: int = 0

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) >= 0):
            raise InvalidParameterError("radii must be positive and strictly decreasing")
        if not self.aperture > 0:
            raise InvalidParameterError("aperture must be positive")
        if self.samples < 1:
            raise InvalidParameterError("need at least one sample per radius")


@dataclass
class Profile:
    """One row per radius; ``columns`` names the entries of each row."""

    name: str
    columns: tuple[str, ...]
    rows: list[tuple[float, ...]] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[self.columns.index(name)] for row in self.rows])

    def as_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}


def sphere_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` low-discrepancy unit vectors in R^dim (dim 2 or 3)."""
    if dim not in (2, 3):
        raise InvalidParameterError("directions are available in 2 and 3 dimensions")
    pts = qmc.Halton(d=dim - 1, scramble=True, seed=seed).random(count)
    if dim == 2:
        a = 2 * np.pi * pts[:, 0]
        return np.stack([np.cos(a), np.sin(a)], -1)
    z = 1 - 2 * pts[:, 0]
    phi = 2 * np.pi * pts[:, 1]
    s = np.sqrt(np.maximum(1 - z * z, 0.0))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], -1)


def _split(p: CriticalPoint, rel: np.ndarray):
    axial = np.linalg.norm(rel @ p.axis_projector, axis=-1)
    trans = np.linalg.norm(rel @ p.complement_projector, axis=-1)
    return axial, trans


def _cone_samples(u: ArrivalField, p: CriticalPoint, r: float, count: int, seed: int,
                  aperture: float, axial: bool = False) -> np.ndarray:
    dirs = sphere_directions(u.ambient_dimension, count, seed)
    if axial:
        # the exact axis points first: they are what the axial profile is about
        K = p.kernel_basis()
        dirs = np.vstack([K.T, -K.T, dirs])
    rel = r * dirs
    a, t = _split(p, rel)
    keep = a >= aperture * t if axial else a <= aperture * t
    pts = p.position + rel[keep]
    return pts[np.isfinite(u.value(pts))]


def cone_continuity_profile(u: ArrivalField, cone: ConeSpec) -> Profile:
    """Max Frobenius distance of Hess u from its apex value on each cone shell.

    Samples lie on spheres around the apex, restricted to the transverse cone
    ``|Pi_axis(x - p)| <= C |Pi(x - p)|``.
    """
    p = cone.apex
    base = p.hess.matrix
    prof = Profile("cone_continuity", ("radius", "max_deviation", "samples"))
    for r in cone.radii:
        pts = _cone_samples(u, p, r, cone.samples, cone.seed, cone.aperture)
        hs = u.hessian(pts) if len(pts) else np.empty((0,) + base.shape)
        ok = np.all(np.isfinite(hs), axis=(1, 2))
        if not np.any(ok):
            raise EmptyShellError(f"no usable sample in the cone at radius {r:g}")
        dev = np.linalg.norm(hs[ok] - base, axis=(1, 2))
        prof.rows.append((float(r), float(dev.max()), int(ok.sum())))
    return prof


def normal_alignment_profile(u: ArrivalField, p: CriticalPoint, radii=DEFAULT_RADII,
                             samples: int = DEFAULT_SAMPLES, seed: int = 0,
                             grad_floor: float = GRAD_FLOOR, axial: bool = False,
                             aperture: float = 1.0) -> Profile:
    """Max ``|Pi_axis(n)|`` over regular samples on shells around ``p``.

    By default the whole shell is used; ``axial=True`` keeps only the cone
    around the kernel directions (``|Pi_axis(x-p)| >= C |Pi(x-p)|``), which
    is where a non-C^2 point shows normals along the axis.
    """
    if p.best_k < 1:
        raise PreconditionError("normal alignment needs a point with an axis (k >= 1)")
    prof = Profile("normal_alignment", ("radius", "max_axis_component", "samples"))
    for r in radii:
        if axial:
            pts = _cone_samples(u, p, r, samples, seed, aperture, axial=True)
        else:
            pts = p.position + r * sphere_directions(u.ambient_dimension, samples, seed)
        g = u.gradient(pts) if len(pts) else np.empty((0, u.ambient_dimension))
        norm = np.linalg.norm(g, axis=-1)
        ok = np.isfinite(norm) & (norm >= grad_floor * r)
        if not np.any(ok):
            raise EmptyShellError(f"no regular sample at radius {r:g}")
        n = g[ok] / norm[ok, None]
        comp = np.linalg.norm(n @ p.axis_projector, axis=-1)
        prof.rows.append((float(r), float(comp.max()), int(ok.sum())))
    return prof


def transverse_max_point(u: ArrivalField, p: CriticalPoint, offset, align_tol: float = ALIGN_TOL,
                         search_radius: float | None = None) -> np.ndarray:
    """Maximize ``u`` on the slice ``p + offset + K^perp`` by lattice hill-climbing.

    The lattice has spacing h in the complement basis of ``p`` and starts at
    ``p + offset``.  Raises NoInteriorMaxError if the climb ends next to the
    edge of the swept region or of the search disc.
    """
    if p.best_k < 1:
        raise PreconditionError("transverse slices need a point with an axis (k >= 1)")
    spec = u.spec
    h = spec.spacing
    if search_radius is None:
        search_radius = 0.05 * max(spec.extent)
    offset = np.asarray(offset, dtype=float)
    if np.linalg.norm(offset) > search_radius:
        raise InvalidParameterError("offset exceeds the search radius")
    if np.linalg.norm(p.complement_projector @ offset) > 1e-8 * max(1.0, np.linalg.norm(offset)):
        raise InvalidParameterError("offset must lie in the kernel of the Hessian")
    C = p.complement_basis()
    origin = p.position + offset
    steps = [np.array(s) for s in itertools.product((-1, 0, 1), repeat=C.shape[1]) if any(s)]
    limit = int(np.ceil(search_radius / h))

    def value(ij):
        if np.max(np.abs(ij)) > limit:
            return np.nan
        return float(u.value((origin + h * (C @ ij))[None])[0])

    cur = np.zeros(C.shape[1], dtype=int)
    best = value(cur)
    if not np.isfinite(best):
        raise NoInteriorMaxError("slice start lies outside the swept region")
    while True:
        vals = [value(cur + s) for s in steps]
        if not np.all(np.isfinite(vals)):
            raise NoInteriorMaxError("maximum on the slice reaches its boundary")
        j = int(np.argmax(vals))
        if vals[j] <= best:
            break
        cur, best = cur + steps[j], vals[j]
    q = origin + h * (C @ cur)
    g = u.gradient(q[None])[0]
    resid = float(np.linalg.norm(p.complement_projector @ g))
    if not resid <= align_tol:
        raise NoInteriorMaxError(f"slice gradient {resid:.3g} exceeds align_tol at the maximum")
    return q


def local_structure_checks(u: ArrivalField, p: CriticalPoint, delta: float,
                           time_tol: float | None = None) -> dict:
    """Local-maximum and kernel-separation tests on an h-lattice in ``B_delta(p)``."""
    h = u.spec.spacing
    if delta < 3 * h * (1 - 1e-12):
        raise InvalidParameterError("delta must be at least 3h")
    if time_tol is None:
        time_tol = 0.01 * float(np.nanmax(u.u))
    m = int(np.floor(delta / h))
    axis = np.arange(-m, m + 1) * h
    rel = np.stack(np.meshgrid(*([axis] * u.ambient_dimension), indexing="ij"), -1)
    rel = rel.reshape(-1, u.ambient_dimension)
    rel = rel[np.linalg.norm(rel, axis=-1) <= delta]
    vals = u.value(p.position + rel)
    ok = np.isfinite(vals)
    rel, vals = rel[ok], vals[ok]
    above = vals > p.u_value + time_tol
    along_axis = np.linalg.norm(rel @ p.axis_projector, axis=-1) <= h
    return {"local_max": bool(not np.any(above)),
            "separation": bool(not np.any(above & along_axis))}


@dataclass
class GeometryProbe:
    position: np.ndarray
    normal: np.ndarray
    H: float
    A_over_H: SymmetricMatrix
    tangent_basis: np.ndarray = field(repr=False)
    frame_checks: dict = field(default_factory=dict)


def _tangent_basis(n: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(np.column_stack([n, np.eye(len(n))]))
    return q[:, 1:len(n)]


def frame_checks(g: np.ndarray, hess: np.ndarray, jac: np.ndarray) -> dict:
    """Frame-identity residuals for stacks of gradients, Hessians and gradient Jacobians.

    The tangential check is ``||P (Hess - sym J) P||_F`` and the mixed one
    ``|P (Hess n - J^T n)|``, the largest value over unit tangent
    directions; both are independent of the tangent frame chosen.
    """
    norm = np.linalg.norm(g, axis=-1)
    n = g / norm[..., None]
    P = np.eye(g.shape[-1]) - n[..., :, None] * n[..., None, :]
    sym = 0.5 * (jac + np.swapaxes(jac, -1, -2))
    tang = P @ (hess - sym) @ P
    grad_norm = np.einsum("...ji,...j->...i", jac, n)  # gradient of |grad u|
    hn = np.einsum("...ij,...j->...i", hess, n)
    mixed = np.einsum("...ij,...j->...i", P, hn - grad_norm)
    return {"tangential": np.linalg.norm(tang, axis=(-2, -1)),
            "normal_normal": np.abs(np.einsum("...i,...i->...", n, hn - grad_norm)),
            "tangent_normal": np.linalg.norm(mixed, axis=-1)}


def geometry_probe(u: ArrivalField, index, grad_floor: float = GRAD_FLOOR) -> GeometryProbe:
    """Normal, speed and shape operator at a regular node, with frame checks.

    ``n = grad u / |grad u|``, ``H = 1 / |grad u|`` and ``A`` is the tangential
    Jacobian of ``n``, taken from the wide-stencil Jacobian of the gradient
    field.  The three identities compare it with the compact Hessian:
    ``Hess(e,e) = A(e,e)/H``, ``Hess(n,n) = d_n |grad u|`` and
    ``Hess(e,n) = d_e |grad u|``.
    """
    index = tuple(int(i) for i in index)
    res = eq12_residual(u, index, grad_floor)  # raises near critical nodes
    if abs(res) > EQ12_REJECT:
        raise PreconditionError(f"field does not look like an arrival time here "
                                f"(equation residual {res:.3g})")
    x = u.node_point(index)[None]
    g = u.gradient(x)[0]
    hess = u.hessian(x)[0]
    jac = u.gradient_jacobian(x)[0]
    if not (np.all(np.isfinite(hess)) and np.all(np.isfinite(jac))):
        raise PreconditionError("node lacks a full stencil inside the swept region")
    norm = float(np.linalg.norm(g))
    if norm < grad_floor:
        raise NearCriticalError(f"|grad u| = {norm:.3g} below the floor {grad_floor}")
    n = g / norm
    E = _tangent_basis(n)
    # Jacobian of n = (I - n n^T) J_g / |g|; its tangential block times |g| = 1/H
    a_over_h = E.T @ jac @ E
    a_over_h = 0.5 * (a_over_h + a_over_h.T)
    checks = {k: float(v) for k, v in frame_checks(g, hess, jac).items()}
    return GeometryProbe(x[0], n, 1.0 / norm, SymmetricMatrix(a_over_h), E, checks)


def frame_check_field(u: ArrivalField, min_grad: float = 0.2) -> dict:
    """:func:`frame_checks` at every node with ``|grad u| >= min_grad`` (1-D arrays).

    Nodes the probe would reject (equation residual above 0.5, incomplete
    stencils) are left out.
    """
    res = residual_map(u, min_grad)
    idx = np.argwhere(np.isfinite(res) & (np.abs(res) <= EQ12_REJECT))
    pts = np.array([u.node_point(i) for i in idx]).reshape(-1, u.ambient_dimension)
    g, hess, jac = u.gradient(pts), u.hessian(pts), u.gradient_jacobian(pts)
    ok = np.all(np.isfinite(hess.reshape(len(pts), -1)), axis=1) & np.all(
        np.isfinite(jac.reshape(len(pts), -1)), axis=1)
    return frame_checks(g[ok], hess[ok], jac[ok])


def rescaled_profile(u: ArrivalField, p: CriticalPoint, radii=DEFAULT_RADII,
                     samples: int = DEFAULT_SAMPLES, seed: int = 0, aperture: float = 1.0,
                     grad_floor: float = GRAD_FLOOR) -> Profile:
    """Convergence of the level sets to a cylinder with axis ``p + K``.

    Per radius, averaged over transverse-cone samples: ``|<n, e_rho>|``,
    ``(n-k)|grad u| / rho``, the largest deviation of the spectrum of
    ``-A/H`` from the cylinder's, and the tangential part of
    ``grad |grad u|`` (which equals ``|grad H| / H^2``).
    """
    k = p.best_k
    if k < 1:
        raise PreconditionError("the rescaled profile needs a point with an axis (k >= 1)")
    n_dim = p.n
    target = np.sort(np.r_[np.zeros(k), np.full(n_dim - k, 1.0 / (n_dim - k))])
    prof = Profile("rescaled", ("radius", "radial_alignment", "normalized_speed",
                                "spectrum_deviation", "grad_H_over_H2", "samples"))
    for r in radii:
        pts = _cone_samples(u, p, r, samples, seed, aperture)
        g = u.gradient(pts) if len(pts) else np.empty((0, u.ambient_dimension))
        jac = u.gradient_jacobian(pts) if len(pts) else np.empty((0,) * 3)
        norm = np.linalg.norm(g, axis=-1)
        ok = (np.isfinite(norm) & (norm >= grad_floor * r)
              & np.all(np.isfinite(jac.reshape(len(pts), -1)), axis=-1))
        if not np.any(ok):
            raise EmptyShellError(f"no regular sample at radius {r:g}")
        rows = []
        for x, gi, ji, ni in zip(pts[ok], g[ok], jac[ok], norm[ok]):
            w = p.complement_projector @ (x - p.position)
            rho = np.linalg.norm(w)
            n = gi / ni
            E = _tangent_basis(n)
            shape = -0.5 * (E.T @ ji @ E + (E.T @ ji @ E).T)
            spec_dev = float(np.max(np.abs(np.linalg.eigvalsh(shape) - target)))
            tang = (np.eye(len(n)) - np.outer(n, n)) @ (ji.T @ n)
            rows.append((abs(n @ w) / rho, (n_dim - k) * ni / rho, spec_dev,
                         float(np.linalg.norm(tang))))
        mean = np.mean(np.array(rows), axis=0)
        prof.rows.append((float(r), *map(float, mean), int(ok.sum())))
    return prof
