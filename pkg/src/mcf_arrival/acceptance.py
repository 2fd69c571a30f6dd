"""Oracle and property checks with pass/fail thresholds, run by ``mcf-arrival verify``.

Each criterion is a function returning a :class:`CriterionResult`.  Flow runs
are cached per process so the criteria can share them.
"""

from __future__ import annotations

import time
from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np

from . import grid as _grid
from . import io as _io
from .analysis import (ConeSpec, c2_verdict, classify_stratum, cone_continuity_profile,
                       find_critical_points, frame_check_field, normal_alignment_profile)
from .arrival import ArrivalField, extinction_time, residual_map
from .errors import MCFError
from .evolve import EvolveParams, evolve
from .grid import GridSpec, SymmetricMatrix
from .pipeline import select_apex
from .scenarios import get_scenario, sample

TORUS_T = 0.03125  # local cylinder estimate r0^2 / 2
NECK_RADII = (0.1, 0.05, 0.025)  # the neck is only 0.15 thick
TORUS_RADII = (0.2, 0.1, 0.05)
TIME_BUDGET_S = 600.0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass
class Run:
    u: ArrivalField
    diag: object
    seconds: float


_RUNS: dict = {}


def simulate(name: str, n: int, **params) -> Run:
    """Evolve a named scenario at resolution ``n`` (memoized, keyed by the fault hook too)."""
    key = (name, n, tuple(sorted(params.items())), _grid._hessian_fault)
    if key not in _RUNS:
        started = time.perf_counter()
        v0 = sample(get_scenario(name, **params), n)
        u, diag = evolve(v0, EvolveParams())
        _RUNS[key] = Run(u, diag, time.perf_counter() - started)
    return _RUNS[key]


def clear_cache() -> None:
    _RUNS.clear()


def _fresh(u: ArrivalField) -> ArrivalField:
    # derivative arrays are cached per instance; a copy recomputes them
    return ArrivalField(u.spec, np.array(u.u), u.partial)


def _analysis(u: ArrivalField):
    points = find_critical_points(u)
    return points, c2_verdict(points, u.spec.spacing)


def _fmt(values) -> str:
    return "[" + ", ".join(f"{v:.4g}" for v in values) + "]"


def _non_increasing(values, slack: float) -> bool:
    return all(b <= a + slack for a, b in zip(values, values[1:]))


# -- oracles -------------------------------------------------------------


def oracle_fields(n: int = 128) -> dict[str, ArrivalField]:
    """Exact arrival times of the circle, the sphere and the cylinder S^1 x R."""
    circle = GridSpec.box((-1.5, -1.5), (1.5, 1.5), n)
    meridian = GridSpec.box((-1.5, 0.0), (1.5, 1.5), n, axisymmetric=True)
    r2 = lambda p: np.sum(p * p, axis=-1)  # noqa: E731
    return {
        "circle": ArrivalField.from_function(circle, lambda p: (1 - r2(p)) / 2),
        "sphere": ArrivalField.from_function(meridian, lambda p: (1 - r2(p)) / 4),
        "cylinder": ArrivalField.from_function(meridian, lambda p: (1 - p[..., 1] ** 2) / 2),
    }


def c1_exact_residual(seed: int = 0) -> CriterionResult:
    medians = {}
    for name, u in oracle_fields(128).items():
        res = residual_map(u, 0.05)
        medians[name] = float(np.median(np.abs(res[np.isfinite(res)])))
    ok = all(m <= 1e-8 for m in medians.values())
    detail = ", ".join(f"{k} median {v:.2e}" for k, v in medians.items()) + " (tol 1e-08)"
    return CriterionResult(1, "exact-solution residual", ok, detail)


def circle_error(u: ArrivalField, radius: float = 0.9) -> float:
    pts = u.spec.points()
    inside = np.linalg.norm(pts, axis=-1) <= radius
    exact = (1 - np.sum(pts[inside] ** 2, axis=-1)) / 2
    return float(np.max(np.abs(u.u[inside] - exact)))


def c2_circle(seed: int = 0) -> CriterionResult:
    run = simulate("circle", 256)
    T, _ = extinction_time(run.u)
    err = circle_error(run.u)
    ok = abs(T - 0.5) <= 0.01 and err <= 0.01 and run.seconds < 60
    return CriterionResult(2, "circle extinction", ok,
                           f"T = {T:.6f}, Linf error {err:.2e}, evolve {run.seconds:.1f}s")


def c3_sphere(seed: int = 0) -> CriterionResult:
    run = simulate("sphere", 256)
    T, _ = extinction_time(run.u)
    points, report = _analysis(run.u)
    top = max(points, key=lambda p: p.u_value)
    eig = np.sort(top.eigenvalues)
    ok = (abs(T - 0.25) <= 0.01 and bool(np.all((eig >= -0.55) & (eig <= -0.45)))
          and top.stratum_k == 0 and report.verdict == "C2"
          and len(report.manifolds) == 1 and report.manifolds[0].k == 0)
    return CriterionResult(3, "sphere extinction point", ok,
                           f"T = {T:.6f}, eigenvalues {_fmt(eig)}, k = {top.stratum_k}, "
                           f"verdict {report.verdict}")


def c4_torus(seed: int = 0) -> CriterionResult:
    run = simulate("torus", 256)
    T, _ = extinction_time(run.u)
    points, report = _analysis(run.u)
    ks = {p.stratum_k for p in points if p.classified}
    m = report.manifolds
    ok = (len(report.time_clusters) == 1 and ks == {1} and len(m) == 1 and m[0].closed
          and m[0].max_tangency_deg <= 5 and m[0].u_spread <= 0.005
          and report.verdict == "C2" and abs(T - TORUS_T) <= 0.25 * TORUS_T)
    shape = (f"{len(m)} component(s), closed {m[0].closed}, tangency "
             f"{m[0].max_tangency_deg:.2g} deg, spread {m[0].u_spread:.2g}" if m else "no manifold")
    return CriterionResult(4, "marriage ring", ok,
                           f"T = {T:.6f}, {len(report.time_clusters)} time cluster(s), "
                           f"classified k {sorted(ks)}, {shape}, verdict {report.verdict}")


def c5_dumbbell(seed: int = 0) -> CriterionResult:
    run = simulate("dumbbell", 256)
    points, report = _analysis(run.u)
    neck = select_apex(points)
    eig = np.sort(neck.eigenvalues)
    close = bool(np.all(np.abs(eig - np.array([-1.0, -1.0, 0.0])) <= 0.15))
    ok = (len(report.time_clusters) >= 2 and report.verdict == "notC2"
          and report.witness == "multiple singular times" and neck.stratum_k == 1 and close)
    return CriterionResult(5, "dumbbell neckpinch", ok,
                           f"{len(report.time_clusters)} time clusters, verdict {report.verdict} "
                           f"({report.witness}); neck u = {neck.u_value:.4g}, eigenvalues "
                           f"{_fmt(eig)}, k = {neck.stratum_k} (residual "
                           f"{neck.cylinder_residual:.3f})")


def c6_cone(seed: int = 0) -> CriterionResult:
    torus = simulate("torus", 256).u
    ring = select_apex(find_critical_points(torus))
    t_dev = cone_continuity_profile(torus, ConeSpec(ring, 1.0, TORUS_RADII, 512, seed)
                                    ).column("max_deviation")
    bell = simulate("dumbbell", 256).u
    neck = select_apex(find_critical_points(bell))
    n_dev = cone_continuity_profile(bell, ConeSpec(neck, 1.0, NECK_RADII, 512, seed)
                                    ).column("max_deviation")
    ok = _non_increasing(t_dev, 0.02) and t_dev[-1] <= 0.1 and _non_increasing(n_dev, 0.02)
    return CriterionResult(6, "transverse cone continuity", ok,
                           f"torus {_fmt(t_dev)} (final tol 0.1), neck {_fmt(n_dev)}")


def c7_alignment(seed: int = 0) -> CriterionResult:
    torus = simulate("torus", 256).u
    ring = select_apex(find_critical_points(torus))
    t_al = normal_alignment_profile(torus, ring, TORUS_RADII, 512, seed
                                    ).column("max_axis_component")
    bell = simulate("dumbbell", 256).u
    neck = select_apex(find_critical_points(bell))
    prof = normal_alignment_profile(bell, neck, NECK_RADII, 512, seed, axial=True)
    n_al = prof.column("max_axis_component")
    radii = prof.column("radius")
    ok = (bool(np.all(np.diff(t_al) < 0)) and t_al[-1] <= 0.15
          and bool(np.any((n_al >= 0.9) & (radii <= 0.1))))
    return CriterionResult(7, "normal alignment", ok,
                           f"torus {_fmt(t_al)}, neck axial {_fmt(n_al)}")


def c8_frames(seed: int = 0) -> CriterionResult:
    med = {}
    for n in (128, 256):
        checks = frame_check_field(simulate("circle", n).u, 0.2)
        med[n] = {k: float(np.median(v)) for k, v in checks.items()}
    ok = all(v <= 0.05 for v in med[256].values()) and all(
        med[256][k] < med[128][k] for k in med[256])
    detail = "; ".join(f"{k}: {med[128][k]:.2e} -> {med[256][k]:.2e}" for k in med[256])
    return CriterionResult(8, "frame identities", ok, detail)


def projector_errors(rng: np.random.Generator, trials: int = 200) -> float:
    """Worst algebra error of the stratum projectors on random cylinder Hessians."""
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 5))
        D = n + 1
        k = int(rng.integers(0, n))
        q, _ = np.linalg.qr(rng.normal(size=(D, D)))
        axis = q[:, :k]
        comp = np.eye(D) - axis @ axis.T
        hess = -comp / (n - k)
        s = classify_stratum(SymmetricMatrix(hess), n, 0.05)
        P, Pi = s.axis_projector, s.complement_projector
        I = np.eye(D)
        errs = [P @ P - P, Pi @ Pi - Pi, P + Pi - I, P @ Pi, hess + Pi / (n - k)]
        worst = max(worst, max(float(np.abs(e).max()) for e in errs),
                    abs(np.trace(P) - k), float(s.k != k))
    return worst


def c9_properties(seed: int = 0, started: float | None = None) -> CriterionResult:
    parts, ok = [], True
    proj = projector_errors(np.random.default_rng(seed))
    ok &= proj <= 1e-10
    parts.append(f"projector error {proj:.1e}")
    runs = [simulate(name, 256) for name in ("circle", "sphere", "torus", "dumbbell")]
    recross = sum(r.diag.recross_events for r in runs)
    mono = sum(r.diag.monotone_violations for r in runs)
    ok &= recross == 0 and mono == 0
    parts.append(f"re-crossings {recross}, sweep violations {mono}")
    torus = simulate("torus", 256).u
    blobs = []
    for _ in range(2):
        u = _fresh(torus)
        points, report = _analysis(u)
        ring = select_apex(points)
        prof = cone_continuity_profile(u, ConeSpec(ring, 1.0, TORUS_RADII, 512, seed))
        blobs.append(_io.dumps(_io.report_dict(report, {"cone": prof.as_dict()}, {"seed": seed})))
    same = blobs[0] == blobs[1]
    ok &= same
    parts.append(f"byte-identical reports {same}")
    e128 = circle_error(simulate("circle", 128).u)
    e256 = circle_error(simulate("circle", 256).u)
    factor = e128 / e256
    ok &= factor >= 1.7
    parts.append(f"convergence factor {factor:.2f}")
    if started is not None:
        elapsed = time.perf_counter() - started
        ok &= elapsed <= TIME_BUDGET_S
        parts.append(f"suite time {elapsed:.0f}s")
    return CriterionResult(9, "property suite", bool(ok), ", ".join(parts))


CRITERIA = {1: c1_exact_residual, 2: c2_circle, 3: c3_sphere, 4: c4_torus, 5: c5_dumbbell,
            6: c6_cone, 7: c7_alignment, 8: c8_frames, 9: c9_properties}


def run_criterion(number: int, seed: int = 0, **extra) -> CriterionResult:
    started = time.perf_counter()
    try:
        result = CRITERIA[number](seed, **extra)
    except MCFError as err:
        result = CriterionResult(number, CRITERIA[number].__name__, False,
                                 f"{type(err).__name__}: {err}")
    result.seconds = time.perf_counter() - started
    return result


def run_all(seed: int = 0, only=None, stencil_fault: float | None = None,
            progress=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) and return their results in order."""
    numbers = sorted(CRITERIA) if not only else sorted(set(only))
    started = time.perf_counter()
    results = []
    guard = _grid.stencil_fault(stencil_fault) if stencil_fault else nullcontext()
    with guard:
        for number in numbers:
            extra = {"started": started} if number == 9 else {}
            result = run_criterion(number, seed, **extra)
            results.append(result)
            if progress is not None:
                progress(result)
    return results


def format_table(results) -> str:
    lines = [f"{'#':>2}  {'criterion':<28} {'result':<6} {'time':>7}  detail"]
    for r in results:
        lines.append(f"{r.number:>2}  {r.name:<28} {'PASS' if r.passed else 'FAIL':<6} "
                     f"{r.seconds:>6.1f}s  {r.detail}")
    return "\n".join(lines)
