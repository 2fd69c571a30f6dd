"""Initial hypersurfaces with known qualitative (and sometimes exact) behaviour.

Implicit functions take node coordinates of shape ``(..., d)`` and are
positive inside.  Axisymmetric shapes are written in meridian coordinates
``(x, rho)``; the surface is obtained by rotating about the x axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import grid as _grid
from .errors import (InvalidParameterError, NoPinchError, NotMeanConvexError,
                     OutsideDomainError)
from .grid import GridSpec

from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import cKDTree

# sampled curvature below -slack counts as a mean-convexity violation
MEAN_CONVEX_SLACK = 0.05


@dataclass(frozen=True)
class Shape:
    name: str
    implicit: Callable[[np.ndarray], np.ndarray]
    mode: str = "full"  # or "axisymmetric"
    expected: dict | None = None
    oracle: Callable[[np.ndarray], np.ndarray] | None = None
    domain: tuple[tuple[float, ...], tuple[float, ...]] = ((-1.5, -1.5), (1.5, 1.5))
    params: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def axisymmetric(self) -> bool:
        return self.mode == "axisymmetric"

    def grid(self, n: int) -> GridSpec:
        """Default grid: the shape's box with ``n`` nodes on the longest side."""
        lo, hi = self.domain
        return GridSpec.box(lo, hi, n, axisymmetric=self.axisymmetric)


def exact_arrival_sphere(R: float, n: int, x) -> np.ndarray | float:
    """Arrival time inside a round n-sphere of radius R: ``(R^2 - |x|^2) / (2n)``."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 > R * R * (1 + 1e-12)):
        raise OutsideDomainError("point lies outside the initial sphere")
    out = (R * R - r2) / (2 * n)
    return out if np.ndim(out) else float(out)


def exact_arrival_cylinder(R: float, n: int, k: int, rho) -> np.ndarray | float:
    """Arrival time of the shrinking cylinder S^{n-k} x R^k: ``(R^2 - rho^2) / (2(n-k))``."""
    if not (k == 0 or 1 <= k <= n - 1):
        raise InvalidParameterError(f"need 0 <= k <= n-1, got k={k}, n={n}")
    rho = np.asarray(rho, dtype=float)
    if np.any(rho > R * (1 + 1e-12)):
        raise OutsideDomainError("rho exceeds the cylinder radius")
    out = (R * R - rho * rho) / (2 * (n - k))
    return out if np.ndim(out) else float(out)


def _radius(p):
    return np.sqrt(np.sum(np.asarray(p, dtype=float) ** 2, axis=-1))


def make_circle(R: float = 1.0) -> Shape:
    if not R > 0:
        raise InvalidParameterError("radius must be positive")
    L = 1.5 * R
    return Shape(
        name="circle",
        implicit=lambda p: R - _radius(p),
        expected={"verdict": "C2", "k": 0, "n_singular_times": 1, "T": R * R / 2},
        oracle=lambda p: exact_arrival_sphere(R, 1, p),
        domain=((-L, -L), (L, L)),
        params={"R": R},
    )


def make_sphere(R: float = 1.0) -> Shape:
    """Round sphere in R^3, represented on the meridian half-plane."""
    if not R > 0:
        raise InvalidParameterError("radius must be positive")
    L = 1.5 * R
    return Shape(
        name="sphere",
        implicit=lambda p: R - _radius(p),
        mode="axisymmetric",
        expected={"verdict": "C2", "k": 0, "n_singular_times": 1, "T": R * R / 4},
        oracle=lambda p: exact_arrival_sphere(R, 2, p),
        domain=((-L, 0.0), (L, L)),
        params={"R": R},
    )


def make_ellipse(a: float = 1.0, b: float = 0.5) -> Shape:
    if not (a > 0 and b > 0):
        raise InvalidParameterError("semi-axes must be positive")
    L = 1.5 * max(a, b)

    def implicit(p):
        q = (p[..., 0] / a) ** 2 + (p[..., 1] / b) ** 2
        # scaled so |grad| ~ 1 near the boundary
        return 0.5 * min(a, b) * (1.0 - q)

    return Shape(
        name="ellipse",
        implicit=implicit,
        expected={"verdict": "C2", "k": 0, "n_singular_times": 1},
        domain=((-L, -L), (L, L)),
        params={"a": a, "b": b},
    )


def make_torus(R0: float = 1.0, r0: float = 0.25) -> Shape:
    """Torus of revolution; thin tori (``r0 < R0/3``) shrink to a circle."""
    if not (R0 > 0 and r0 > 0):
        raise InvalidParameterError("radii must be positive")
    if r0 >= R0:
        raise InvalidParameterError("tube radius must be below the ring radius")
    warnings = ()
    expected = {"verdict": "C2", "k": 1, "n_singular_times": 1, "T": r0 * r0 / 2}
    if not r0 < R0 / 3:
        warnings = (f"torus is not thin (r0={r0} >= R0/3={R0 / 3:.4g}); "
                    "extinction along a circle is not guaranteed",)
        expected = None
    L = R0 + 2 * r0
    return Shape(
        name="torus",
        implicit=lambda p: r0 - np.sqrt(p[..., 0] ** 2 + (p[..., 1] - R0) ** 2),
        mode="axisymmetric",
        expected=expected,
        domain=((-L, 0.0), (L, L)),
        params={"R0": R0, "r0": r0},
        warnings=warnings,
    )


# --------------------------------------------------------------------------
# dumbbell


# flare scale of the cosh neck ends, in units of the neck radius; 1 would be
# a catenoid (zero mean curvature), larger values flare more gently
NECK_FLARE = 1.1


def _neck_bulb_gap(neck_r, bulb_r, sep, scale, shift=0.0):
    """min over the bulb span of (neck radius - bulb radius); zero at tangency."""
    def diff(x):
        return (neck_r * np.cosh(max(x - shift, 0.0) / scale)
                - np.sqrt(max(bulb_r ** 2 - (x - sep) ** 2, 0.0)))
    res = minimize_scalar(diff, bounds=(sep - bulb_r, sep), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun), float(res.x)


def dumbbell_profile(bulb_r: float, neck_r: float, sep: float, flare: float = NECK_FLARE):
    """Meridian radius ``R(x)`` of the dumbbell.

    The neck is straight (radius ``neck_r``) for ``|x| <= shift`` and then
    flares as ``neck_r cosh((|x| - shift) / s)`` with ``s = flare * neck_r``,
    meeting each bulb circle tangentially so the profile is C^1.  If the
    bulbs are too close for a straight part, ``shift = 0`` and ``s`` is
    solved for tangency instead.  Returns ``(radius, s, shift, x_junction)``.
    """
    if not flare >= 1:
        raise InvalidParameterError("flare below 1 makes the neck mean concave")
    scale = flare * neck_r
    shift = 0.0
    if _neck_bulb_gap(neck_r, bulb_r, sep, scale)[0] > 0:
        shift = brentq(lambda t: _neck_bulb_gap(neck_r, bulb_r, sep, scale, t)[0],
                       0.0, sep, xtol=1e-14)
    else:
        lo = neck_r * (1 + 1e-9)
        if _neck_bulb_gap(neck_r, bulb_r, sep, lo)[0] <= 0:
            raise NotMeanConvexError("a catenoidal neck already reaches the bulbs; "
                                     "no mean-convex cosh neck exists")
        scale = brentq(lambda s_: _neck_bulb_gap(neck_r, bulb_r, sep, s_)[0], lo, scale,
                       xtol=1e-14)
    xj = _neck_bulb_gap(neck_r, bulb_r, sep, scale, shift)[1]

    def radius(x):
        ax = np.abs(np.asarray(x, dtype=float))
        bulb = np.sqrt(np.maximum(bulb_r ** 2 - (ax - sep) ** 2, 0.0))
        neck = neck_r * np.cosh(np.maximum(ax - shift, 0.0) / scale)
        return np.where(ax <= xj, neck, bulb)

    return radius, scale, shift, xj


def _meridian_curve(bulb_r, neck_r, sep, ds=2e-4):
    radius, scale, shift, xj = dumbbell_profile(bulb_r, neck_r, sep)
    # neck part: x in [0, xj]
    xs = np.linspace(0.0, xj, max(int(xj / ds), 2) * 2)
    neck = np.stack([xs, radius(xs)], -1)
    # bulb arc from the junction to the tip on the axis
    a0 = np.arctan2(float(radius(xj)), xj - sep)
    angles = np.linspace(a0, 0.0, max(int(bulb_r * a0 / ds), 2))
    arc = np.stack([sep + bulb_r * np.cos(angles), bulb_r * np.sin(angles)], -1)
    half = np.concatenate([neck, arc[1:]])
    mirrored = half[::-1] * np.array([-1.0, 1.0])
    return np.concatenate([mirrored[:-1], half]), radius, scale, shift, xj


def _polyline_distance(curve, tree, pts):
    """Distance to the polyline through ``curve`` (segments next to the nearest vertex)."""
    _, i = tree.query(pts)
    best = np.full(len(pts), np.inf)
    for j0 in (i - 1, i):
        j0 = np.clip(j0, 0, len(curve) - 2)
        a, b = curve[j0], curve[j0 + 1]
        ab = b - a
        t = np.clip(np.sum((pts - a) * ab, -1) / np.sum(ab * ab, -1), 0.0, 1.0)
        d = np.linalg.norm(pts - (a + t[:, None] * ab), axis=-1)
        best = np.minimum(best, d)
    return best


def _axisym_mean_curvature(implicit, x, rho, step=2e-3):
    """Mean curvature (sum of principal curvatures) of the level sets of an
    axisymmetric implicit function, positive for a sphere seen from outside."""
    f = lambda a, b: implicit(np.stack([a, b], axis=-1))
    fx = (f(x + step, rho) - f(x - step, rho)) / (2 * step)
    fr = (f(x, rho + step) - f(x, rho - step)) / (2 * step)
    fxx = (f(x + step, rho) - 2 * f(x, rho) + f(x - step, rho)) / step ** 2
    frr = (f(x, rho + step) - 2 * f(x, rho) + f(x, rho - step)) / step ** 2
    fxr = (f(x + step, rho + step) - f(x + step, rho - step)
           - f(x - step, rho + step) + f(x - step, rho - step)) / (4 * step ** 2)
    g2 = fx * fx + fr * fr
    g = np.sqrt(g2)
    div = (fxx + frr - (fx * fx * fxx + 2 * fx * fr * fxr + fr * fr * frr) / g2) / g + fr / (rho * g)
    return -div


def zero_set_points(shape: Shape, spacing: float = 2e-3) -> np.ndarray:
    """Points on the zero level set, from sign changes on a fine grid."""
    lo, hi = shape.domain
    axes = [np.arange(a, b + spacing / 2, spacing) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    f = shape.implicit(pts)
    found = []
    for axis in range(len(axes)):
        a = np.moveaxis(f, axis, 0)
        p = np.moveaxis(pts, axis, 0)
        change = (a[:-1] > 0) != (a[1:] > 0)
        fa, fb = a[:-1][change], a[1:][change]
        pa, pb = p[:-1][change], p[1:][change]
        w = (fa / (fa - fb))[:, None]
        found.append(pa + w * (pb - pa))
    return np.concatenate(found)


def initial_mean_curvature(shape: Shape, spacing: float = 2e-3) -> np.ndarray:
    """Mean curvature sampled densely on the zero level set of an axisymmetric shape."""
    if not shape.axisymmetric:
        raise InvalidParameterError("mean-curvature gate supports axisymmetric shapes")
    pts = zero_set_points(shape, spacing)
    pts = pts[pts[:, 1] > 10 * spacing]
    return _axisym_mean_curvature(shape.implicit, pts[:, 0], pts[:, 1])


def make_dumbbell(bulb_r: float = 0.5, neck_r: float = 0.15, sep: float = 0.75,
                  check: bool = True) -> Shape:
    """Two round bulbs at ``x = +-sep`` joined by a thin, mostly straight neck.

    The implicit function is the exact signed distance to the meridian
    profile (sampled as a fine polyline).
    """
    if not (bulb_r > 0 and neck_r > 0):
        raise InvalidParameterError("radii must be positive")
    if not sep > bulb_r:
        raise InvalidParameterError("bulb centres must be farther apart than a bulb radius")
    if not neck_r < bulb_r / 2:
        raise NoPinchError(
            f"neck radius {neck_r} >= bulb_r/2 = {bulb_r / 2}: the neck need not pinch "
            "before the bulbs vanish")
    curve, radius, scale, shift, xj = _meridian_curve(bulb_r, neck_r, sep)
    tree = cKDTree(curve)
    tip = sep + bulb_r

    def implicit(p):
        p = np.asarray(p, dtype=float)
        dist = _polyline_distance(curve, tree, p.reshape(-1, 2)).reshape(p.shape[:-1])
        x, rho = p[..., 0], p[..., 1]
        inside = (np.abs(x) < tip) & (rho < radius(x))
        return np.where(inside, dist, -dist)

    L = tip + 0.25
    shape = Shape(
        name="dumbbell",
        implicit=implicit,
        mode="axisymmetric",
        expected={"verdict": "notC2", "n_singular_times": 2},
        domain=((-L, 0.0), (L, bulb_r + 0.25)),
        params={"bulb_r": bulb_r, "neck_r": neck_r, "sep": sep,
                "neck_scale": scale, "neck_shift": shift, "junction_x": xj},
    )
    if check:
        hmin = float(np.min(initial_mean_curvature(shape)))
        if hmin < -MEAN_CONVEX_SLACK:
            raise NotMeanConvexError(f"initial mean curvature reaches {hmin:.4g} < 0")
    return shape


REGISTRY = {
    "circle": lambda c: make_circle(c.get("R", 1.0)),
    "sphere": lambda c: make_sphere(c.get("R", 1.0)),
    "ellipse": lambda c: make_ellipse(c.get("a", 1.0), c.get("b", 0.5)),
    "torus": lambda c: make_torus(c.get("R0", 1.0), c.get("r0", 0.25)),
    "dumbbell": lambda c: make_dumbbell(c.get("bulb_r", 0.5), c.get("neck_r", 0.15),
                                        c.get("sep", 0.75)),
}


def get_scenario(name: str, **params) -> Shape:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown scenario {name!r}; choose from {sorted(REGISTRY)}") from None
    return factory(params)


def sample(shape: Shape, n: int):
    """Sample ``shape`` on its default grid with ``n`` nodes along the long side."""
    return _grid.sample_implicit(shape, shape.grid(n))
