"""Explicit time marching of the level-set mean-curvature equation.

The level-set function is advanced with forward Euler until its positive
region disappears.  Each node's zero crossing is recorded on the fly and
becomes the arrival time.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from . import grid as _grid
from .arrival import ArrivalField, crossing_time
from .errors import (IncompleteSweepError, InvalidParameterError, NumericalBlowupError,
                     PreconditionError, StabilityError)
from .grid import GridSpec, ScalarField

log = logging.getLogger(__name__)

_DT_SLACK = 1e-12
# default regularization as a fraction of h; larger values let the nodes next
# to a critical point sweep at heat-equation speed and flatten Hess u there
EPS_FACTOR = 0.01


@dataclass(frozen=True)
class EvolveParams:
    epsilon: float | None = None  # None -> EPS_FACTOR * h
    cfl: float = 0.4
    t_max: float = 10.0
    record_stride: int = 100
    reinit_stride: int = 0

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        if not 0 < self.cfl <= 1:
            raise InvalidParameterError("cfl must lie in (0, 1]")
        if not self.t_max > 0:
            raise InvalidParameterError("t_max must be positive")
        if self.record_stride < 1:
            raise InvalidParameterError("record_stride must be >= 1")
        if self.reinit_stride < 0:
            raise InvalidParameterError("reinit_stride must be >= 0")

    def eps_for(self, spec: GridSpec) -> float:
        return EPS_FACTOR * spec.spacing if self.epsilon is None else float(self.epsilon)


def stable_dt(spec: GridSpec, params: EvolveParams) -> float:
    d_eff = spec.dimension + (1 if spec.axisymmetric else 0)
    return params.cfl * spec.spacing ** 2 / (2 * d_eff)


@dataclass
class DiagnosticsLog:
    rows: list[tuple[int, float, int, float, float]] = field(default_factory=list)
    steps: int = 0
    dt: float = 0.0
    monotone_violations: int = 0
    recross_events: int = 0
    max_increase: float = 0.0
    min_decrease: float = 0.0
    wall_time: float = 0.0

    COLUMNS = ("step", "t", "positive_nodes", "max_v", "min_v")

    def record(self, step, t, v):
        self.rows.append((step, float(t), int(np.count_nonzero(v > 0)),
                          float(v.max()), float(v.min())))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.COLUMNS)
            for step, t, pos, vmax, vmin in self.rows:
                w.writerow([step, repr(t), pos, repr(vmax), repr(vmin)])


class CrossingRecorder:
    """Per-node first zero crossing of a decreasing level-set function."""

    def __init__(self, v0: np.ndarray):
        self.crossing = np.full(v0.shape, np.nan)
        self.ever_positive = v0 > 0
        self.recross_events = 0

    def update(self, v_prev, v_next, t_prev, t_next):
        crossed = (v_prev > 0) & (v_next <= 0)
        fresh = crossed & np.isnan(self.crossing)
        if np.any(fresh):
            self.crossing[fresh] = crossing_time(v_prev[fresh], v_next[fresh], t_prev, t_next)
        # a node becoming positive again after its crossing would break the
        # monotone sweep; count it, never record it
        back = (v_next > 0) & ~np.isnan(self.crossing)
        self.recross_events += int(np.count_nonzero(back))
        self.ever_positive |= v_next > 0

    @property
    def remaining(self) -> int:
        return int(np.count_nonzero(self.ever_positive & np.isnan(self.crossing)))


def _neumann_copy(v: np.ndarray, spec: GridSpec) -> None:
    for axis in range(spec.dimension):
        idx = [slice(None)] * spec.dimension
        src = [slice(None)] * spec.dimension
        if not (spec.axisymmetric and axis == 1):
            idx[axis], src[axis] = 0, 1
            v[tuple(idx)] = v[tuple(src)]
        idx[axis], src[axis] = -1, -2
        v[tuple(idx)] = v[tuple(src)]


def _advance(v: np.ndarray, spec: GridSpec, dt: float, eps: float, buf: np.ndarray) -> np.ndarray:
    buf[(slice(1, -1),) * spec.dimension] = v
    if spec.axisymmetric:
        buf[:, 0] = buf[:, 2]
    rhs = _grid.curvature_rhs_array(v, spec, eps, padded=buf)
    out = v + dt * rhs
    _neumann_copy(out, spec)
    if not np.all(np.isfinite(out)):
        bad = np.unravel_index(int(np.argmax(~np.isfinite(out))), out.shape)
        raise NumericalBlowupError(f"non-finite value at node {tuple(int(i) for i in bad)}",
                                   node=tuple(int(i) for i in bad))
    return out


def _check_dt(spec, dt, params):
    limit = stable_dt(spec, params)
    if dt > limit * (1 + _DT_SLACK):
        raise StabilityError(f"dt = {dt:.6g} exceeds the stable step {limit:.6g}")


def step(field_: ScalarField, dt: float, params: EvolveParams) -> ScalarField:
    """One forward-Euler step of the regularized level-set equation."""
    if field_.label != "levelset":
        raise PreconditionError("step needs a level-set field")
    spec = field_.spec
    _check_dt(spec, dt, params)
    buf = np.zeros(tuple(c + 2 for c in spec.counts))
    out = _advance(np.array(field_.values), spec, dt, params.eps_for(spec), buf)
    return ScalarField(spec, out, "levelset")


def reinitialize(v: np.ndarray, spec: GridSpec, iterations: int = 5) -> np.ndarray:
    """Pseudo-time iterations of ``v_tau = sign(v) (1 - |grad v|)`` (Godunov upwinding)."""
    h = spec.spacing
    dtau = 0.3 * h
    sign = v / np.sqrt(v * v + h * h)
    v = v.copy()
    for _ in range(iterations):
        p = _grid.pad(v, spec, fill=0.0)
        # edge padding for true boundaries
        for axis in range(spec.dimension):
            lo = [slice(None)] * spec.dimension
            hi = [slice(None)] * spec.dimension
            lo[axis], hi[axis] = 0, -1
            s1 = [slice(None)] * spec.dimension
            s2 = [slice(None)] * spec.dimension
            s1[axis], s2[axis] = 1, -2
            if not (spec.axisymmetric and axis == 1):
                p[tuple(lo)] = p[tuple(s1)]
            p[tuple(hi)] = p[tuple(s2)]
        grad2_pos = np.zeros_like(v)
        grad2_neg = np.zeros_like(v)
        for axis in range(spec.dimension):
            plus = [0] * spec.dimension
            minus = [0] * spec.dimension
            plus[axis], minus[axis] = 1, -1
            c = _grid._shifted(p, [0] * spec.dimension)
            a = (c - _grid._shifted(p, minus)) / h  # backward
            b = (_grid._shifted(p, plus) - c) / h  # forward
            grad2_pos += np.maximum(np.maximum(a, 0) ** 2, np.minimum(b, 0) ** 2)
            grad2_neg += np.maximum(np.minimum(a, 0) ** 2, np.maximum(b, 0) ** 2)
        grad = np.where(sign > 0, np.sqrt(grad2_pos), np.sqrt(grad2_neg))
        v = v - dtau * sign * (grad - 1.0)
    return v


def evolve(v0: ScalarField, params: EvolveParams = EvolveParams(),
           snapshot_dir: str | Path | None = None) -> tuple[ArrivalField, DiagnosticsLog]:
    """March ``v0`` until the positive region is gone; return the arrival time.

    Raises IncompleteSweepError (carrying the partial field) when ``t_max``
    is reached first.
    """
    if v0.label != "levelset":
        raise PreconditionError("evolve needs a level-set field")
    spec = v0.spec
    v = np.array(v0.values)
    if not np.any(v > 0):
        raise PreconditionError("initial field has no positive region")
    if np.any(v[~_grid.interior_mask(spec)] > 0):
        raise PreconditionError("positive region touches the grid boundary")
    dt = stable_dt(spec, params)
    eps = params.eps_for(spec)
    recorder = CrossingRecorder(v)
    diag = DiagnosticsLog(dt=dt)
    buf = np.zeros(tuple(c + 2 for c in spec.counts))
    spare = np.empty_like(v)
    compiled = spec.dimension == 2
    t = 0.0
    n = 0
    diag.record(0, t, v)
    positive = int(np.count_nonzero(v > 0))
    vmax, vmin = float(v.max()), float(v.min())
    started = time.perf_counter()
    if snapshot_dir is not None:
        snapshot_dir = Path(snapshot_dir)
        snapshot_dir.mkdir(parents=True, exist_ok=True)
    while positive > 0 and t < params.t_max:
        t_next = t + dt
        if compiled:
            now_positive, recross, new_max, new_min, bi, bj = _kernels.step_record_2d(
                v, spare, recorder.crossing, spec.spacing, dt, eps, spec.axisymmetric,
                spec.origin[1], t, t_next, _grid._hessian_fault)
            if bi >= 0:
                raise NumericalBlowupError(f"non-finite value at node {(bi, bj)}", node=(bi, bj))
            v_next = spare
            recorder.recross_events += recross
        else:
            v_next = _advance(v, spec, dt, eps, buf)
            recorder.update(v, v_next, t, t_next)
            now_positive = int(np.count_nonzero(v_next > 0))
            new_max, new_min = float(v_next.max()), float(v_next.min())
        if params.reinit_stride and (n + 1) % params.reinit_stride == 0:
            v_next = reinitialize(v_next, spec)
            now_positive = int(np.count_nonzero(v_next > 0))
            new_max, new_min = float(v_next.max()), float(v_next.min())
        diag.max_increase = max(diag.max_increase, new_max - vmax)
        diag.min_decrease = max(diag.min_decrease, vmin - new_min)
        if now_positive > positive:
            diag.monotone_violations += 1
        positive, vmax, vmin = now_positive, new_max, new_min
        if compiled and v_next is spare:
            v, spare = spare, v
        else:
            v = v_next
        t, n = t_next, n + 1
        if n % params.record_stride == 0:
            diag.record(n, t, v)
            if snapshot_dir is not None:
                from .io import write_mcaf
                write_mcaf(snapshot_dir / f"snapshot_{n:07d}.mcaf", ScalarField(spec, v))
    if diag.rows[-1][0] != n:
        diag.record(n, t, v)
    diag.steps = n
    diag.recross_events = recorder.recross_events
    diag.wall_time = time.perf_counter() - started
    log.info("evolved %d steps to t=%.5g in %.1fs", n, t, diag.wall_time)
    partial = positive > 0 or recorder.remaining > 0
    arrival = ArrivalField(spec, recorder.crossing, partial=partial)
    if partial:
        raise IncompleteSweepError(
            f"t_max={params.t_max} reached with {positive} positive nodes left",
            arrival=arrival, diagnostics=diag)
    return arrival, diag
