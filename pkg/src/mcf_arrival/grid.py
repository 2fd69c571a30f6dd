"""Uniform grids, scalar fields and second-order finite-difference operators.

Conventions
-----------
* Fields are stored as C-ordered arrays of shape ``spec.shape`` (row-major,
  last axis fastest), which is also the flat layout of the MCAF format.
* In axisymmetric mode the grid is the meridian half-plane ``(x, rho)``;
  axis 1 is ``rho`` and starts at 0.  The row ``rho = 0`` is the symmetry
  axis, not a boundary: stencils reaching below it use mirrored values.
* Level-set functions are positive inside the hypersurface.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainTooSmallError, InvalidParameterError, StencilError

BOUNDARY_MARGIN = 4

# Test-harness hook: relative perturbation of the diagonal second-difference
# stencil.  Always 0 outside fault-injection runs.
_hessian_fault = 0.0


@contextlib.contextmanager
def stencil_fault(scale: float) -> Iterator[None]:
    """Temporarily corrupt the diagonal Hessian stencil by ``(1 + scale)``."""
    global _hessian_fault
    previous = _hessian_fault
    _hessian_fault = float(scale)
    try:
        yield
    finally:
        _hessian_fault = previous


@dataclass(frozen=True)
class GridSpec:
    counts: tuple[int, ...]
    origin: tuple[float, ...]
    spacing: float
    axisymmetric: bool = False

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        origin = tuple(float(o) for o in self.origin)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))
        if len(counts) not in (2, 3):
            raise InvalidParameterError(f"dimension must be 2 or 3, got {len(counts)}")
        if len(origin) != len(counts):
            raise InvalidParameterError("origin and counts differ in length")
        if any(c < 8 for c in counts):
            raise InvalidParameterError(f"every axis needs at least 8 nodes, got {counts}")
        if not (self.spacing > 0 and np.isfinite(self.spacing)):
            raise InvalidParameterError(f"spacing must be positive, got {self.spacing}")
        if self.axisymmetric:
            if len(counts) != 2:
                raise InvalidParameterError("axisymmetric grids are 2D (x, rho)")
            if origin[1] != 0.0:
                raise InvalidParameterError("axisymmetric grids need rho origin 0")

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float], n: int,
            axisymmetric: bool = False) -> "GridSpec":
        """Grid covering ``[lo, hi]`` with ``n`` nodes along the longest side.

        Shorter sides get as many nodes as needed to reach ``hi`` at the
        same spacing (so they may overshoot it by less than one cell).
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        extent = hi - lo
        if np.any(extent <= 0):
            raise InvalidParameterError("box needs hi > lo on every axis")
        if n < 8:
            raise InvalidParameterError(f"n must be >= 8, got {n}")
        h = float(extent.max()) / (n - 1)
        counts = tuple(int(np.ceil(e / h - 1e-9)) + 1 for e in extent)
        return cls(counts, tuple(lo), h, axisymmetric)

    @property
    def dimension(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def ambient_dimension(self) -> int:
        """Dimension of the space the hypersurface lives in."""
        return 3 if self.axisymmetric else self.dimension

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple((c - 1) * self.spacing for c in self.counts)

    def axes(self) -> list[np.ndarray]:
        return [o + self.spacing * np.arange(c) for o, c in zip(self.origin, self.counts)]

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``counts + (d,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def position(self, index: Sequence[int]) -> np.ndarray:
        return np.asarray(self.origin) + self.spacing * np.asarray(index, dtype=float)

    def fractional_index(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - np.asarray(self.origin)) / self.spacing


@dataclass(frozen=True)
class ScalarField:
    spec: GridSpec
    values: np.ndarray
    label: str = "levelset"

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        if values.size != self.spec.size:
            raise InvalidParameterError(
                f"expected {self.spec.size} values, got {values.size}")
        values = values.reshape(self.spec.shape)
        if self.label not in ("levelset", "arrival"):
            raise InvalidParameterError(f"unknown label {self.label!r}")
        if self.label == "levelset" and not np.all(np.isfinite(values)):
            raise InvalidParameterError("level-set values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass(frozen=True)
class SymmetricMatrix:
    """Small symmetric matrix (order 2 or 3)."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParameterError("symmetric matrix must be square")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_upper(cls, order: int, entries: Sequence[float]) -> "SymmetricMatrix":
        m = np.zeros((order, order))
        m[np.triu_indices(order)] = entries
        return cls(m + np.triu(m, 1).T)

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    @property
    def upper(self) -> np.ndarray:
        return self.matrix[np.triu_indices(self.order)]

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues ascending and orthonormal eigenvectors (columns)."""
        return np.linalg.eigh(self.matrix)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


# --------------------------------------------------------------------------
# sampling


def boundary_layer_mask(spec: GridSpec, width: int = BOUNDARY_MARGIN) -> np.ndarray:
    """Nodes within ``width`` cells of a true boundary (never the axis)."""
    mask = np.zeros(spec.shape, dtype=bool)
    for axis, count in enumerate(spec.counts):
        lo = [slice(None)] * spec.dimension
        hi = [slice(None)] * spec.dimension
        lo[axis] = slice(0, width + 1)
        hi[axis] = slice(count - width - 1, count)
        if not (spec.axisymmetric and axis == 1):
            mask[tuple(lo)] = True
        mask[tuple(hi)] = True
    return mask


def sample_implicit(shape, spec: GridSpec) -> ScalarField:
    """Evaluate ``shape.implicit`` at every node of ``spec``.

    Raises DomainTooSmallError when the positive region comes within
    ``BOUNDARY_MARGIN`` cells of the boundary or is empty.
    """
    values = np.asarray(shape.implicit(spec.points()), dtype=float)
    if values.shape != spec.shape:
        raise InvalidParameterError("implicit returned an array of the wrong shape")
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("implicit function is not finite on the grid")
    if np.any(values[boundary_layer_mask(spec)] >= 0):
        raise DomainTooSmallError(
            f"zero level set of {getattr(shape, 'name', 'shape')!r} lies within "
            f"{BOUNDARY_MARGIN}h of the grid boundary")
    if not np.any(values > 0):
        raise DomainTooSmallError("implicit function has no positive region on the grid")
    return ScalarField(spec, values, "levelset")


# --------------------------------------------------------------------------
# node-level stencils


def _node_value(values: np.ndarray, spec: GridSpec, index: tuple[int, ...]) -> float:
    idx = list(index)
    if spec.axisymmetric and idx[1] < 0:
        idx[1] = -idx[1]
    for i, c in zip(idx, spec.counts):
        if not 0 <= i < c:
            raise StencilError(f"stencil leaves the grid at {tuple(index)}")
    return float(values[tuple(idx)])


def _check_interior(spec: GridSpec, index: Sequence[int]) -> tuple[int, ...]:
    index = tuple(int(i) for i in index)
    if len(index) != spec.dimension:
        raise StencilError(f"index {index} has wrong dimension")
    for axis, (i, c) in enumerate(zip(index, spec.counts)):
        lower = 0 if (spec.axisymmetric and axis == 1) else 1
        if not lower <= i <= c - 2:
            raise StencilError(f"index {index} is within one node of the boundary")
    return index


def _offset(index, *pairs):
    out = list(index)
    for axis, step in pairs:
        out[axis] += step
    return tuple(out)


def gradient_at(field: ScalarField, index: Sequence[int]) -> np.ndarray:
    """Central-difference gradient at an interior node (grid coordinates)."""
    spec = field.spec
    index = _check_interior(spec, index)
    h = spec.spacing
    v = field.values
    return np.array([
        (_node_value(v, spec, _offset(index, (i, 1)))
         - _node_value(v, spec, _offset(index, (i, -1)))) / (2 * h)
        for i in range(spec.dimension)])


def hessian_at(field: ScalarField, index: Sequence[int]) -> SymmetricMatrix:
    """Second-order Hessian stencil at an interior node (grid coordinates)."""
    spec = field.spec
    index = _check_interior(spec, index)
    h2 = spec.spacing ** 2
    v = field.values
    d = spec.dimension
    c = _node_value(v, spec, index)
    m = np.empty((d, d))
    for i in range(d):
        fp = _node_value(v, spec, _offset(index, (i, 1)))
        fm = _node_value(v, spec, _offset(index, (i, -1)))
        m[i, i] = (1.0 + _hessian_fault) * (fp - 2 * c + fm) / h2
        for j in range(i + 1, d):
            m[i, j] = m[j, i] = (
                _node_value(v, spec, _offset(index, (i, 1), (j, 1)))
                - _node_value(v, spec, _offset(index, (i, 1), (j, -1)))
                - _node_value(v, spec, _offset(index, (i, -1), (j, 1)))
                + _node_value(v, spec, _offset(index, (i, -1), (j, -1)))) / (4 * h2)
    return SymmetricMatrix(m)


def _axis_term(grad_rho, hess_rhorho, rho):
    """(d_rho v)/rho, with the symmetric limit d_rho_rho v on the axis."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rho > 0, grad_rho / np.where(rho > 0, rho, 1.0), hess_rhorho)


def curvature_rhs(field: ScalarField, index: Sequence[int], epsilon: float) -> float:
    """Regularized mean-curvature operator at one node.

    ``lap v - g.Hg / (|g|^2 + eps^2)``, plus ``v_rho / rho`` in axisymmetric
    mode (``v_rho_rho`` on the axis row).  On the axis the mirrored gradient
    has no rho component; the normal term there uses ``h * v_rho_rho``, the
    gradient one node off the axis, so a thin neck does not fall back to
    twice its cylindrical speed.
    """
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    g = gradient_at(field, index)
    hm = hessian_at(field, index).matrix
    if field.spec.axisymmetric and index[1] == 0:
        g[1] = field.spec.spacing * hm[1, 1]
    rhs = np.trace(hm) - g @ hm @ g / (g @ g + epsilon ** 2)
    if field.spec.axisymmetric:
        rho = field.spec.position(index)[1]
        rhs += float(_axis_term(g[1], hm[1, 1], rho))
    return float(rhs)


# --------------------------------------------------------------------------
# whole-array operators


def pad(values: np.ndarray, spec: GridSpec, fill: float = np.nan) -> np.ndarray:
    """Pad by one node per side; the axis side mirrors in axisymmetric mode."""
    p = np.full(tuple(c + 2 for c in spec.counts), fill)
    p[(slice(1, -1),) * spec.dimension] = values
    if spec.axisymmetric:
        p[:, 0] = p[:, 2]
    return p


def _shifted(p: np.ndarray, offsets: Sequence[int]) -> np.ndarray:
    return p[tuple(slice(1 + o, p.shape[a] - 1 + o) for a, o in enumerate(offsets))]


def derivative_arrays(values: np.ndarray, spec: GridSpec, padded: np.ndarray | None = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Gradient ``(d, *shape)`` and Hessian ``(d, d, *shape)`` on every node.

    Nodes whose stencil leaves the grid, or touches a NaN, get NaN.
    """
    d = spec.dimension
    h = spec.spacing
    p = pad(values, spec) if padded is None else padded
    zero = (0,) * d
    c = _shifted(p, zero)

    def unit(*pairs):
        off = [0] * d
        for axis, step in pairs:
            off[axis] += step
        return _shifted(p, off)

    grad = np.empty((d,) + spec.shape)
    hess = np.empty((d, d) + spec.shape)
    for i in range(d):
        fp, fm = unit((i, 1)), unit((i, -1))
        grad[i] = (fp - fm) / (2 * h)
        hess[i, i] = (1.0 + _hessian_fault) * (fp - 2 * c + fm) / h ** 2
        for j in range(i + 1, d):
            hess[i, j] = hess[j, i] = (unit((i, 1), (j, 1)) - unit((i, 1), (j, -1))
                                       - unit((i, -1), (j, 1)) + unit((i, -1), (j, -1))) / (4 * h ** 2)
    return grad, hess


def curvature_rhs_array(values: np.ndarray, spec: GridSpec, epsilon: float,
                        padded: np.ndarray | None = None) -> np.ndarray:
    """:func:`curvature_rhs` on every node at once (NaN off-stencil)."""
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    grad, hess = derivative_arrays(values, spec, padded)
    d = spec.dimension
    if spec.axisymmetric:
        grad[1][:, 0] = spec.spacing * hess[1, 1][:, 0]
    lap = sum(hess[i, i] for i in range(d))
    quad = sum(grad[i] * grad[i] * hess[i, i] for i in range(d))
    for i in range(d):
        for j in range(i + 1, d):
            quad = quad + 2 * grad[i] * grad[j] * hess[i, j]
    norm2 = sum(grad[i] ** 2 for i in range(d))
    rhs = lap - quad / (norm2 + epsilon ** 2)
    if spec.axisymmetric:
        rho = spec.axes()[1][None, :]
        rhs = rhs + _axis_term(grad[1], hess[1, 1], rho)
    return rhs


def interior_mask(spec: GridSpec) -> np.ndarray:
    """Nodes with a full stencil (the axis row counts as interior)."""
    mask = np.ones(spec.shape, dtype=bool)
    for axis in range(spec.dimension):
        lo = [slice(None)] * spec.dimension
        hi = [slice(None)] * spec.dimension
        lo[axis] = 0
        hi[axis] = -1
        if not (spec.axisymmetric and axis == 1):
            mask[tuple(lo)] = False
        mask[tuple(hi)] = False
    return mask
