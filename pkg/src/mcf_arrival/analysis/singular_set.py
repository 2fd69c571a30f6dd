"""Singular times, the singular set as a manifold, and the C^2 verdict."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import ConvexHull, QhullError, cKDTree

from ..errors import InsufficientDataError, InvalidParameterError, MixedStratumError
from .critical import CriticalPoint

ANGLE_TOL_DEG = 5.0
TIME_TOL_FRACTION = 0.01
UNCLASSIFIED_LIMIT = 0.10
NEIGHBOR_RADIUS = 3.0  # in units of h
LIPSCHITZ_HOPS = 5


@dataclass(frozen=True)
class TimeCluster:
    time: float  # mean arrival time of the members
    members: tuple[int, ...]


def cluster_singular_times(points: list[CriticalPoint], time_tol: float) -> list[TimeCluster]:
    """Single-linkage clusters of the critical values, sorted by time."""
    if not points:
        raise InvalidParameterError("no critical points to cluster")
    if not time_tol > 0:
        raise InvalidParameterError("time_tol must be positive")
    values = np.array([p.u_value for p in points])
    order = np.argsort(values, kind="stable")
    groups = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] > time_tol:
            groups.append([])
        groups[-1].append(int(cur))
    return [TimeCluster(float(values[g].mean()), tuple(sorted(g))) for g in groups]


@dataclass
class ManifoldComponent:
    k: int
    members: tuple[int, ...]  # indices into the point list
    closed: bool
    max_tangency: float  # radians
    u_spread: float
    tangent_projectors: np.ndarray = field(repr=False)  # (m, D, D) fitted tangent projectors
    adjacency: object = field(repr=False, default=None)  # sparse graph over members

    @property
    def n_points(self) -> int:
        return len(self.members)

    @property
    def max_tangency_deg(self) -> float:
        return float(np.degrees(self.max_tangency))


def _neighbor_graph(positions: np.ndarray, radius: float):
    tree = cKDTree(positions)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    m = len(positions)
    if len(pairs) == 0:
        return coo_matrix((m, m)).tocsr()
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m)).tocsr()


def _fit_tangent(p: CriticalPoint, neighbors: np.ndarray) -> np.ndarray:
    """Least-squares graph over the kernel of ``p``; returns an orthonormal tangent basis."""
    K = p.kernel_basis()
    C = p.complement_basis()
    k = K.shape[1]
    if len(neighbors) < k + 1:
        return K
    rel = neighbors - p.position
    s = rel @ K
    w = rel @ C
    design = np.hstack([np.ones((len(s), 1)), s])
    coef, *_ = np.linalg.lstsq(design, w, rcond=None)
    slope = coef[1:]  # (k, D-k)
    tangent = K + C @ slope.T
    q, _ = np.linalg.qr(tangent)
    return q


def _surrounded(coords: np.ndarray) -> bool:
    """True if the origin lies strictly inside the hull of the tangent-plane offsets."""
    k = coords.shape[1]
    if len(coords) < k + 1:
        return False
    if k == 1:
        return bool(coords.min() < 0 < coords.max())
    try:
        hull = ConvexHull(coords)
    except QhullError:
        return False
    return bool(np.all(hull.equations[:, -1] < 0))


def _tangency_angle(tangent: np.ndarray, kernel: np.ndarray) -> float:
    sv = np.linalg.svd(tangent.T @ kernel, compute_uv=False)
    return float(np.arccos(np.clip(sv.min(), -1.0, 1.0)))


def fit_singular_manifold(points: list[CriticalPoint], h: float,
                          radius: float | None = None) -> list[ManifoldComponent]:
    """Group classified points into connected components and fit each as a C^1 graph.

    Edges join points closer than ``radius`` (default ``3h``).  For ``k >= 1``
    every point gets a local affine fit of its neighbours as a graph over its
    Hessian kernel; the angle between that tangent plane and the kernel is
    reported.  A component is closed when every member has neighbours on all
    sides within its fitted tangent plane (no boundary points).  ``k = 0`` components are single singular points, however many
    detections they hold.
    """
    if not h > 0:
        raise InvalidParameterError("h must be positive")
    radius = NEIGHBOR_RADIUS * h if radius is None else float(radius)
    idx = [i for i, p in enumerate(points) if p.classified]
    if not idx:
        return []
    pos = np.array([points[i].position for i in idx])
    graph = _neighbor_graph(pos, radius)
    ncomp, labels = connected_components(graph, directed=False)
    out = []
    for c in range(ncomp):
        local = np.flatnonzero(labels == c)
        members = tuple(idx[j] for j in local)
        ks = sorted({points[i].stratum_k for i in members})
        if len(ks) > 1:
            raise MixedStratumError(f"component mixes strata k={ks}", ks=ks)
        k = ks[0]
        us = np.array([points[i].u_value for i in members])
        spread = float(us.max() - us.min())
        sub = graph[local][:, local]
        D = pos.shape[1]
        if k == 0:
            proj = np.zeros((len(local), D, D))
            out.append(ManifoldComponent(0, members, True, 0.0, spread, proj, sub))
            continue
        closed = True
        worst = 0.0
        proj = np.empty((len(local), D, D))
        for a, j in enumerate(local):
            p = points[idx[j]]
            nb = sub[a].indices
            tangent = _fit_tangent(p, np.vstack([p.position[None], pos[local[nb]]]))
            proj[a] = tangent @ tangent.T
            closed &= _surrounded((pos[local[nb]] - p.position) @ tangent)
            worst = max(worst, _tangency_angle(tangent, p.kernel_basis()))
        out.append(ManifoldComponent(k, members, closed, worst, spread, proj, sub))
    out.sort(key=lambda comp: (points[comp.members[0]].u_value, comp.members))
    return out


def hessian_tangent_lipschitz(points: list[CriticalPoint], component: ManifoldComponent,
                              hops: int = LIPSCHITZ_HOPS, min_distance: float = 1e-6
                              ) -> float | None:
    """Largest ``|Hess(p) - Hess(q)| / dist(T_p, T_q)`` over pairs within ``hops`` graph steps.

    ``dist`` is the operator norm of the difference of the fitted tangent
    projectors.  Returns None when every pair has (numerically) the same
    tangent plane.
    """
    if component.k < 1:
        raise InvalidParameterError("needs a component of dimension k >= 1")
    m = component.n_points
    if m < 8:
        raise InsufficientDataError(f"{m} points, need at least 8")
    hop = dijkstra(component.adjacency, directed=False, unweighted=True, limit=hops + 0.5)
    hess = np.array([points[i].hess.matrix for i in component.members])
    proj = component.tangent_projectors
    a, b = np.nonzero(np.triu(hop <= hops, 1))
    dist = np.linalg.norm(proj[a] - proj[b], ord=2, axis=(1, 2))
    keep = dist >= min_distance
    if not np.any(keep):
        return None
    num = np.linalg.norm(hess[a[keep]] - hess[b[keep]], axis=(1, 2))
    return float(np.max(num / dist[keep]))


@dataclass
class Condition:
    name: str
    passed: bool
    detail: str
    structural: bool  # a failure is a witness against C^2, not a tolerance miss


@dataclass
class SingularSetReport:
    points: list[CriticalPoint]
    time_clusters: list[TimeCluster]
    manifolds: list[ManifoldComponent]
    verdict: str
    verdict_reasons: list[Condition]
    unclassified: int
    tolerances: dict

    @property
    def witness(self) -> str | None:
        failed = [c for c in self.verdict_reasons if c.structural and not c.passed]
        return failed[0].name if failed else None


def c2_verdict(points: list[CriticalPoint], h: float, time_tol: float | None = None,
               angle_tol_deg: float = ANGLE_TOL_DEG, radius: float | None = None
               ) -> SingularSetReport:
    """Cluster, fit and judge the singular set.

    The verdict is ``notC2`` when a structural condition fails (more than one
    singular time, more than one component, mixed strata, an open curve),
    ``inconclusive`` when only a tolerance fails or too many detections are
    unclassified, and ``C2`` otherwise.  Critical points enter the time
    clustering whether or not their Hessian was classified.
    """
    if not points:
        raise InvalidParameterError("no critical points found; the field has no singular set")
    T = max(p.u_value for p in points)
    time_tol = TIME_TOL_FRACTION * T if time_tol is None else float(time_tol)
    clusters = cluster_singular_times(points, time_tol)
    unclassified = sum(not p.classified for p in points)
    reasons = [Condition(
        "multiple singular times", len(clusters) == 1,
        f"{len(clusters)} cluster(s) at t = " + ", ".join(f"{c.time:.6g}" for c in clusters),
        True)]
    try:
        manifolds = fit_singular_manifold(points, h, radius)
        reasons.append(Condition("mixed strata", True, "uniform k per component", True))
    except MixedStratumError as err:
        manifolds = []
        reasons.append(Condition("mixed strata", False, str(err), True))
    if manifolds:
        reasons.append(Condition("multiple components", len(manifolds) == 1,
                                 f"{len(manifolds)} connected component(s)", True))
        open_parts = [i for i, m in enumerate(manifolds) if not m.closed]
        reasons.append(Condition("open singular set", not open_parts,
                                 f"components without closure: {open_parts}", True))
        angle = max(m.max_tangency_deg for m in manifolds)
        reasons.append(Condition("tangency", angle <= angle_tol_deg,
                                 f"max angle {angle:.3g} deg (tol {angle_tol_deg:g})", False))
        spread = max(m.u_spread for m in manifolds)
        reasons.append(Condition("u not constant", spread <= time_tol,
                                 f"u spread {spread:.3g} (tol {time_tol:.3g})", False))
    frac = unclassified / len(points)
    reasons.append(Condition("unclassified points", frac <= UNCLASSIFIED_LIMIT,
                             f"{unclassified} of {len(points)} unclassified", False))
    if not manifolds and all(c.passed for c in reasons if c.name != "mixed strata"):
        reasons.append(Condition("no classified points", False, "nothing to fit", False))

    if any(c.structural and not c.passed for c in reasons):
        verdict = "notC2"
    elif all(c.passed for c in reasons):
        verdict = "C2"
    else:
        verdict = "inconclusive"
    tolerances = {"time_tol": time_tol, "angle_tol_deg": angle_tol_deg,
                  "neighbor_radius": NEIGHBOR_RADIUS * h if radius is None else float(radius),
                  "unclassified_limit": UNCLASSIFIED_LIMIT}
    return SingularSetReport(points, clusters, manifolds, verdict, reasons, unclassified,
                             tolerances)
