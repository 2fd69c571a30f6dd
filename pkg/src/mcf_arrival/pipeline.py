"""End-to-end pipelines behind the command line: run and analyze."""

from __future__ import annotations

import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from . import io as _io
from .analysis import (ConeSpec, c2_verdict, cone_continuity_profile, find_critical_points,
                       local_structure_checks, normal_alignment_profile, rescaled_profile)
from .arrival import ArrivalField, residual_map
from .config import RunConfig
from .errors import EmptyShellError, IncompleteSweepError, MCFError, PreconditionError
from .evolve import EvolveParams, evolve
from .scenarios import get_scenario, sample


@contextmanager
def stage(name: str, timings: dict):
    """Time a pipeline stage and tag any library error with its name."""
    started = time.perf_counter()
    try:
        yield
    except MCFError as err:
        if getattr(err, "stage", None) is None:
            err.stage = name
        raise
    finally:
        timings[name] = round(time.perf_counter() - started, 6)


def evolve_params(cfg: RunConfig) -> EvolveParams:
    return EvolveParams(epsilon=cfg.get("evolve.epsilon"), cfl=cfg["evolve.cfl"],
                        t_max=cfg["evolve.t_max"], record_stride=cfg["evolve.record_stride"],
                        reinit_stride=cfg["evolve.reinit_stride"])


def select_apex(points):
    """Earliest point with an axis (best-fit k >= 1), else the latest point."""
    axial = [p for p in points if p.best_k >= 1]
    if axial:
        return min(axial, key=lambda p: p.u_value)
    return max(points, key=lambda p: p.u_value)


def _profile_entry(func):
    try:
        prof = func()
    except (EmptyShellError, PreconditionError) as err:
        return None, {"error": str(err)}
    return prof, prof.as_dict()


def analyze_field(u: ArrivalField, cfg: RunConfig):
    """Critical points, verdict and profiles; returns (report, profile dict, Profile list)."""
    h = u.spec.spacing
    points = find_critical_points(u, tau=cfg.get("analysis.tau"), tol=cfg["analysis.tol"])
    report = c2_verdict(points, h, time_tol=cfg.get("analysis.time_tol"),
                        angle_tol_deg=cfg["analysis.angle_tol"])
    apex = select_apex(points)
    radii = tuple(cfg["analysis.radii"])
    seed, samples = cfg["seed"], cfg["analysis.samples"]
    C, floor = cfg["analysis.cone_c"], cfg["analysis.grad_floor"]
    jobs = {
        "cone_continuity": lambda: cone_continuity_profile(
            u, ConeSpec(apex, C, radii, samples, seed)),
        "normal_alignment": lambda: normal_alignment_profile(
            u, apex, radii, samples, seed, floor),
        "normal_alignment_axial": lambda: normal_alignment_profile(
            u, apex, radii, samples, seed, floor, axial=True, aperture=C),
        "rescaled": lambda: rescaled_profile(u, apex, radii, samples, seed, C, floor),
    }
    profiles = {"apex": {"position": apex.position, "u": apex.u_value, "best_k": apex.best_k}}
    computed = []
    for name, job in jobs.items():
        prof, entry = _profile_entry(job)
        profiles[name] = entry
        if prof is not None:
            prof.name = name
            computed.append(prof)
    delta = cfg["analysis.delta"]
    if delta >= 3 * h:
        profiles["local_structure"] = local_structure_checks(
            u, apex, delta, cfg.get("analysis.time_tol"))
    return report, profiles, computed


def write_analysis(out: Path, u: ArrivalField, report, profiles, computed, cfg) -> list[Path]:
    files = []
    path = out / "report.json"
    _io.write_json(path, _io.report_dict(report, profiles, cfg.echo()))
    files.append(path)
    for prof in computed:
        path = out / f"profile_{prof.name}.csv"
        _io.write_csv(path, prof.columns, prof.rows)
        files.append(path)
    path = out / "arrival.pgm"
    _io.write_pgm(path, u.u)
    files.append(path)
    path = out / "residual.pgm"
    _io.write_pgm(path, residual_map(u, cfg["analysis.grad_floor"]))
    files.append(path)
    return files


def _mark_partial(files) -> None:
    for f in files:
        f = Path(f)
        if f.exists():
            f.replace(f.with_name(f.name + ".partial"))


def run(cfg: RunConfig, out: Path | None = None) -> dict:
    """Sample, evolve, analyze and write every artifact; returns the report dict."""
    out = Path(cfg["output.dir"] if out is None else out)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict = {}
    files: list[Path] = []
    try:
        with stage("sample", timings):
            shape = get_scenario(cfg["scenario.name"], **cfg.scenario_params())
            v0 = sample(shape, cfg["grid.n"])
        with stage("evolve", timings):
            try:
                u, diag = evolve(v0, evolve_params(cfg))
            except IncompleteSweepError as err:
                _io.write_mcaf(out / "arrival.mcaf", err.arrival)
                files.append(out / "arrival.mcaf")
                err.diagnostics.to_csv(out / "diagnostics.csv")
                files.append(out / "diagnostics.csv")
                raise
            _io.write_mcaf(out / "arrival.mcaf", u)
            diag.to_csv(out / "diagnostics.csv")
            files += [out / "arrival.mcaf", out / "diagnostics.csv"]
        with stage("analyze", timings):
            report, profiles, computed = analyze_field(u, cfg)
        with stage("write", timings):
            files += write_analysis(out, u, report, profiles, computed, cfg)
    except MCFError:
        _io.write_manifest(out / "manifest.json", cfg.echo(), __version__, timings,
                           [f for f in files if f.exists()])
        files.append(out / "manifest.json")
        _mark_partial(files)
        raise
    _io.write_manifest(out / "manifest.json", cfg.echo(), __version__, timings, files)
    return _io.report_dict(report, profiles, cfg.echo())


def analyze(path, cfg: RunConfig, out: Path | None = None) -> dict:
    """Analyze a stored arrival field (MCAF with the arrival flag)."""
    out = Path(cfg["output.dir"] if out is None else out)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict = {}
    with stage("read", timings):
        u = _io.read_mcaf(path, expect="arrival")
    with stage("analyze", timings):
        report, profiles, computed = analyze_field(u, cfg)
    with stage("write", timings):
        files = write_analysis(out, u, report, profiles, computed, cfg)
    _io.write_manifest(out / "manifest.json", cfg.echo(), __version__, timings, files,
                       inputs=[path])
    return _io.report_dict(report, profiles, cfg.echo())


def export(path, out: Path, fmt: str = "pgm") -> Path:
    """Convert a stored field to a heatmap (pgm) or a node table (csv)."""
    out.mkdir(parents=True, exist_ok=True)
    field = _io.read_mcaf(path)
    stem = Path(path).stem
    values = field.u if isinstance(field, ArrivalField) else np.asarray(field.values)
    if fmt == "pgm":
        if values.ndim != 2:
            raise _io.FormatError("heatmaps are written for 2D grids only")
        target = out / f"{stem}.pgm"
        _io.write_pgm(target, values)
    elif fmt == "csv":
        target = out / f"{stem}.csv"
        _io.write_field_csv(target, field)
    else:
        raise _io.FormatError(f"unknown export format {fmt!r}")
    return target
