"""Arrival-time fields, their derivative probes and the arrival-time residual.

An :class:`ArrivalField` keeps ``u`` on the grid with NaN outside the swept
region.  Derivatives are taken with the same stencils as :mod:`.grid`, so a
derivative is NaN exactly when its stencil touches an unswept node.

Analysis code works in *ambient* coordinates: the grid coordinates for
ordinary grids, and ``(x, y, z)`` in R^3 for axisymmetric grids, where the
meridian data ``(x, rho)`` is rotated about the x axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import grid as _grid
from .errors import (InvalidCrossingError, NearCriticalError, PartialFieldError,
                     PreconditionError)
from .grid import GridSpec, ScalarField

GRAD_FLOOR = 0.05


def crossing_time(v_prev, v_next, t_prev, t_next):
    """Time at which ``v`` hits zero, by linear interpolation in time.

    Works elementwise on arrays.  Requires ``v_prev > 0 >= v_next`` and
    ``t_prev < t_next``.
    """
    v_prev = np.asarray(v_prev, dtype=float)
    v_next = np.asarray(v_next, dtype=float)
    t_prev = np.asarray(t_prev, dtype=float)
    t_next = np.asarray(t_next, dtype=float)
    if np.any(v_prev <= 0) or np.any(v_next > 0) or np.any(t_prev >= t_next):
        raise InvalidCrossingError(
            "crossing needs v_prev > 0 >= v_next and t_prev < t_next")
    t = t_prev + (t_next - t_prev) * v_prev / (v_prev - v_next)
    return t if t.ndim else float(t)


def interpolate(array: np.ndarray, spec: GridSpec, coords: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of node data at grid-coordinate points.

    ``coords`` has shape ``(..., d)`` in physical grid coordinates.  Corners
    with zero weight are ignored, so a point sitting on a node only needs
    that node to be finite.  Points outside the grid give NaN.
    """
    coords = np.asarray(coords, dtype=float)
    frac = spec.fractional_index(coords)
    lead = frac.shape[:-1]
    frac = frac.reshape(-1, spec.dimension)
    counts = np.asarray(spec.counts)
    base = np.floor(frac).astype(int)
    base = np.minimum(base, counts - 2)
    t = frac - base
    inside = np.all((frac >= -1e-9) & (frac <= counts - 1 + 1e-9), axis=1)
    base = np.clip(base, 0, counts - 2)
    t = np.clip(t, 0.0, 1.0)
    out = np.zeros(len(frac))
    bad = ~inside
    for corner in np.ndindex(*(2,) * spec.dimension):
        corner = np.asarray(corner)
        w = np.prod(np.where(corner, t, 1.0 - t), axis=1)
        idx = tuple((base + corner).T)
        vals = array[idx]
        use = w > 0
        bad |= use & ~np.isfinite(vals)
        out += np.where(use, w * np.where(np.isfinite(vals), vals, 0.0), 0.0)
    out[bad] = np.nan
    return out.reshape(lead)


def _pad_parity(values: np.ndarray, spec: GridSpec, parity: float) -> np.ndarray:
    """Pad with NaN; across the axis mirror with the given parity (+1 / -1)."""
    p = _grid.pad(values, spec)
    if spec.axisymmetric:
        p[:, 0] = parity * p[:, 2]
    return p


@dataclass(frozen=True, eq=False)
class ArrivalField:
    """Arrival time ``u`` on a grid; NaN where the front never passed."""

    spec: GridSpec
    u: np.ndarray = field(repr=False)
    partial: bool = False

    def __post_init__(self):
        u = np.array(self.u, dtype=float).reshape(self.spec.shape)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_function(cls, spec: GridSpec, func, inside=None) -> "ArrivalField":
        """Inject an analytic arrival time (used for stencil-precision oracles).

        ``func`` maps grid points ``(..., d)`` to times; ``inside`` optionally
        maps points to a boolean mask (default: ``func >= 0``).
        """
        pts = spec.points()
        u = np.asarray(func(pts), dtype=float)
        mask = np.asarray(inside(pts), dtype=bool) if inside is not None else u >= 0
        return cls(spec, np.where(mask, u, np.nan))

    @property
    def mask(self) -> np.ndarray:
        return np.isfinite(self.u)

    @property
    def n(self) -> int:
        """Dimension of the evolving hypersurface."""
        return self.spec.ambient_dimension - 1

    @property
    def ambient_dimension(self) -> int:
        return self.spec.ambient_dimension

    def as_scalar_field(self) -> ScalarField:
        return ScalarField(self.spec, self.u, "arrival")

    # -- node derivative arrays (grid coordinates) -----------------------

    @cached_property
    def _derivs(self):
        return _grid.derivative_arrays(self.u, self.spec, _pad_parity(self.u, self.spec, 1.0))

    @property
    def grad_array(self) -> np.ndarray:
        return self._derivs[0]

    @property
    def hess_array(self) -> np.ndarray:
        return self._derivs[1]

    @cached_property
    def grad_norm_array(self) -> np.ndarray:
        return np.sqrt(np.sum(self.grad_array ** 2, axis=0))

    @cached_property
    def gradjac_array(self) -> np.ndarray:
        """Central-difference Jacobian of the gradient field, ``J[i, j] = d_j g_i``.

        A second, wider discretization of the Hessian used for the frame
        identities; it is not symmetrized.
        """
        spec = self.spec
        d = spec.dimension
        h = spec.spacing
        out = np.empty((d, d) + spec.shape)
        for i in range(d):
            parity = -1.0 if (spec.axisymmetric and i == 1) else 1.0
            p = _pad_parity(self.grad_array[i], spec, parity)
            for j in range(d):
                plus = [0] * d
                minus = [0] * d
                plus[j], minus[j] = 1, -1
                out[i, j] = (_grid._shifted(p, plus) - _grid._shifted(p, minus)) / (2 * h)
        return out

    @cached_property
    def _azimuthal(self):
        """``u_rho / rho`` (compact) and ``g_rho / rho`` (wide) node arrays."""
        rho = self.spec.axes()[1][None, :]
        compact = _grid._axis_term(self.grad_array[1], self.hess_array[1, 1], rho)
        wide = _grid._axis_term(self.grad_array[1], self.gradjac_array[1, 1], rho)
        return compact, wide

    # -- ambient probes ---------------------------------------------------

    def grid_coords(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if not self.spec.axisymmetric:
            return points
        rho = np.sqrt(points[..., 1] ** 2 + points[..., 2] ** 2)
        return np.stack([points[..., 0], rho], axis=-1)

    def _frames(self, points):
        """Unit vectors e_rho, e_phi at ambient points (axisymmetric only)."""
        y, z = points[..., 1], points[..., 2]
        rho = np.sqrt(y * y + z * z)
        on_axis = rho < 1e-12
        safe = np.where(on_axis, 1.0, rho)
        zeros = np.zeros_like(y)
        e_rho = np.stack([zeros, np.where(on_axis, 1.0, y / safe), np.where(on_axis, 0.0, z / safe)], -1)
        e_phi = np.stack([zeros, np.where(on_axis, 0.0, -z / safe), np.where(on_axis, 1.0, y / safe)], -1)
        return e_rho, e_phi

    def value(self, points) -> np.ndarray:
        return interpolate(self.u, self.spec, self.grid_coords(points))

    def gradient(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        gc = self.grid_coords(points)
        comps = np.stack([interpolate(g, self.spec, gc) for g in self.grad_array], axis=-1)
        if not self.spec.axisymmetric:
            return comps
        e_rho, _ = self._frames(points)
        ex = np.zeros_like(e_rho)
        ex[..., 0] = 1.0
        return comps[..., :1] * ex + comps[..., 1:2] * e_rho

    def _lift_matrix(self, points, mer, azim):
        """Ambient 3x3 matrices from meridian 2x2 data and an azimuthal entry."""
        e_rho, e_phi = self._frames(points)
        ex = np.zeros_like(e_rho)
        ex[..., 0] = 1.0
        basis = (ex, e_rho)
        out = azim[..., None, None] * e_phi[..., :, None] * e_phi[..., None, :]
        for a in range(2):
            for b in range(2):
                out = out + mer[..., a, b, None, None] * basis[a][..., :, None] * basis[b][..., None, :]
        return out

    def _interp_matrix(self, arr, gc):
        d = self.spec.dimension
        m = np.empty(gc.shape[:-1] + (d, d))
        for a in range(d):
            for b in range(d):
                m[..., a, b] = interpolate(arr[a, b], self.spec, gc)
        return m

    def hessian(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        gc = self.grid_coords(points)
        mer = self._interp_matrix(self.hess_array, gc)
        if not self.spec.axisymmetric:
            return mer
        azim = interpolate(self._azimuthal[0], self.spec, gc)
        return self._lift_matrix(points, mer, azim)

    def gradient_jacobian(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        gc = self.grid_coords(points)
        mer = self._interp_matrix(self.gradjac_array, gc)
        if not self.spec.axisymmetric:
            return mer
        azim = interpolate(self._azimuthal[1], self.spec, gc)
        return self._lift_matrix(points, mer, azim)

    def node_point(self, index: Sequence[int]) -> np.ndarray:
        """Ambient position of a node (azimuth 0 for axisymmetric grids)."""
        pos = self.spec.position(index)
        if self.spec.axisymmetric:
            pos = np.array([pos[0], pos[1], 0.0])
        return pos


# --------------------------------------------------------------------------
# residual and extinction


def _node_derivatives(u: ArrivalField, index):
    """Ambient gradient and Hessian at a node from the compact stencils."""
    field_ = u.as_scalar_field()
    g = _grid.gradient_at(field_, index)
    hm = _grid.hessian_at(field_, index).matrix
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(hm))):
        raise PreconditionError(f"stencil at {tuple(index)} is not fully inside the swept region")
    if u.spec.axisymmetric:
        rho = u.spec.position(index)[1]
        azim = float(_grid._axis_term(g[1], hm[1, 1], rho))
        g = np.array([g[0], g[1], 0.0])
        h3 = np.zeros((3, 3))
        h3[:2, :2] = hm
        h3[2, 2] = azim
        hm = h3
    return g, hm


def eq12_residual(u: ArrivalField, index: Sequence[int], grad_floor: float = GRAD_FLOOR) -> float:
    """Residual ``1 + lap u - (g.Hg)/|g|^2`` of the arrival-time equation at a node."""
    g, hm = _node_derivatives(u, index)
    norm2 = float(g @ g)
    if np.sqrt(norm2) < grad_floor:
        raise NearCriticalError(
            f"|grad u| = {np.sqrt(norm2):.3g} < {grad_floor} at {tuple(index)}")
    return float(1.0 + np.trace(hm) - g @ hm @ g / norm2)


def residual_map(u: ArrivalField, grad_floor: float = GRAD_FLOOR) -> np.ndarray:
    """Vectorized :func:`eq12_residual`; NaN where undefined."""
    g = u.grad_array
    hm = u.hess_array
    d = u.spec.dimension
    lap = sum(hm[i, i] for i in range(d))
    quad = sum(g[i] * g[j] * hm[i, j] for i in range(d) for j in range(d))
    norm2 = sum(g[i] ** 2 for i in range(d))
    if u.spec.axisymmetric:
        lap = lap + u._azimuthal[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        res = 1.0 + lap - quad / norm2
    res[~(np.sqrt(norm2) >= grad_floor)] = np.nan
    return res


def extinction_time(u: ArrivalField) -> tuple[float, tuple[int, ...]]:
    """``T = max u`` and the first node (row-major) attaining it."""
    if u.partial:
        raise PartialFieldError("extinction time of a partially swept field is undefined")
    if not np.any(u.mask):
        raise PartialFieldError("arrival field has no swept nodes")
    flat = np.where(u.mask, u.u, -np.inf).reshape(-1)
    k = int(np.argmax(flat))
    return float(flat[k]), tuple(int(i) for i in np.unravel_index(k, u.spec.shape))


def lipschitz_estimate(u: ArrivalField) -> float:
    """Max of ``|u(a) - u(b)| / h`` over adjacent swept node pairs."""
    best = 0.0
    for axis in range(u.spec.dimension):
        diff = np.abs(np.diff(u.u, axis=axis)) / u.spec.spacing
        if np.any(np.isfinite(diff)):
            best = max(best, float(np.nanmax(diff)))
    return best
