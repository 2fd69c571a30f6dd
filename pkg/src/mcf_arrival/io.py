"""File formats: MCAF binary fields, CSV tables, PGM heatmaps, JSON reports."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from pathlib import Path

import numpy as np

from .arrival import ArrivalField
from .errors import FormatError, MCFError
from .grid import GridSpec, ScalarField

MAGIC = b"MCAF1\x00"
FLAG_AXISYMMETRIC = 1
FLAG_ARRIVAL = 2


def write_mcaf(path, field: ScalarField | ArrivalField) -> None:
    """Little-endian MCAF v1; masked arrival nodes are stored as NaN."""
    spec = field.spec
    if isinstance(field, ArrivalField):
        values, flags = field.u, FLAG_ARRIVAL
    elif field.label == "arrival":
        values, flags = field.values, FLAG_ARRIVAL
    else:
        values, flags = field.values, 0
    if spec.axisymmetric:
        flags |= FLAG_AXISYMMETRIC
    d = spec.dimension
    header = MAGIC + struct.pack("<BB", d, flags)
    header += struct.pack(f"<{d}Q", *spec.counts)
    header += struct.pack(f"<{d}d", *spec.origin)
    header += struct.pack("<d", spec.spacing)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_mcaf(path, expect: str | None = None) -> ScalarField | ArrivalField:
    """Read an MCAF file; ``expect`` ('levelset' or 'arrival') checks the label flag."""
    data = Path(path).read_bytes()
    if data[:6] != MAGIC:
        raise FormatError(f"{path}: not an MCAF v1 file (bad magic)")
    if len(data) < 8:
        raise FormatError(f"{path}: truncated header")
    d, flags = struct.unpack_from("<BB", data, 6)
    if d not in (2, 3):
        raise FormatError(f"{path}: unsupported dimension {d}")
    if flags & ~(FLAG_AXISYMMETRIC | FLAG_ARRIVAL):
        raise FormatError(f"{path}: unknown flag bits {flags:#04x}")
    head = 8 + 16 * d + 8
    if len(data) < head:
        raise FormatError(f"{path}: truncated header")
    counts = struct.unpack_from(f"<{d}Q", data, 8)
    origin = struct.unpack_from(f"<{d}d", data, 8 + 8 * d)
    (spacing,) = struct.unpack_from("<d", data, 8 + 16 * d)
    size = math.prod(counts)
    if len(data) != head + 8 * size:
        raise FormatError(f"{path}: expected {size} values, found {(len(data) - head) / 8:g}")
    label = "arrival" if flags & FLAG_ARRIVAL else "levelset"
    if expect is not None and expect != label:
        raise FormatError(f"{path}: holds a {label} field, expected {expect}")
    try:
        spec = GridSpec(tuple(int(c) for c in counts), tuple(origin), spacing,
                        axisymmetric=bool(flags & FLAG_AXISYMMETRIC))
        values = np.frombuffer(data, dtype="<f8", count=size, offset=head).astype(float)
        if label == "arrival":
            return ArrivalField(spec, values.reshape(spec.shape))
        return ScalarField(spec, values, "levelset")
    except MCFError as err:
        raise FormatError(f"{path}: {err}") from err


def write_csv(path, columns, rows) -> None:
    """Header row, comma separated, LF endings; floats in shortest round-trip form."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def field_rows(field: ScalarField | ArrivalField):
    """(index..., position..., value) rows for every node."""
    spec = field.spec
    values = field.u if isinstance(field, ArrivalField) else field.values
    for idx in np.ndindex(*spec.shape):
        yield (*idx, *map(float, spec.position(idx)), float(values[idx]))


def write_field_csv(path, field) -> None:
    names = ("x", "rho") if field.spec.axisymmetric else ("x", "y", "z")[:field.spec.dimension]
    cols = [f"i{a}" for a in range(field.spec.dimension)] + list(names) + ["value"]
    write_csv(path, cols, field_rows(field))


def write_pgm(path, array: np.ndarray) -> tuple[float, float]:
    """8-bit binary PGM of a 2D array (rows = first axis).

    Finite values map linearly onto 1..255; NaN is 0.  The min and max are
    recorded in a header comment and returned.
    """
    a = np.asarray(array, dtype=float)
    if a.ndim != 2:
        raise FormatError("heatmaps need a 2D array")
    finite = np.isfinite(a)
    lo = float(a[finite].min()) if finite.any() else 0.0
    hi = float(a[finite].max()) if finite.any() else 0.0
    scale = 254.0 / (hi - lo) if hi > lo else 0.0
    img = np.zeros(a.shape, dtype=np.uint8)
    img[finite] = (1 + np.rint((a[finite] - lo) * scale)).astype(np.uint8)
    header = f"P5\n# min={lo!r} max={hi!r}\n{a.shape[1]} {a.shape[0]}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.tobytes())
    return lo, hi


def read_pgm(path) -> tuple[np.ndarray, float, float]:
    data = Path(path).read_bytes()
    lines = data.split(b"\n", 4)
    if len(lines) < 5 or lines[0] != b"P5" or not lines[1].startswith(b"# min="):
        raise FormatError(f"{path}: not a heatmap written by write_pgm")
    lo, hi = (float(part.split(b"=")[1]) for part in lines[1][2:].split())
    w, h = map(int, lines[2].split())
    img = np.frombuffer(lines[4], dtype=np.uint8)
    if img.size != w * h:
        raise FormatError(f"{path}: pixel count mismatch")
    return img.reshape(h, w), lo, hi


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))


def report_dict(report, profiles: dict, config: dict) -> dict:
    """The report JSON layout (fixed key names)."""
    return {
        "verdict": report.verdict,
        "witness": report.witness,
        "verdict_reasons": [{"condition": c.name, "passed": c.passed, "detail": c.detail,
                             "structural": c.structural} for c in report.verdict_reasons],
        "time_clusters": [{"time": c.time, "members": list(c.members)}
                          for c in report.time_clusters],
        "manifolds": [{"k": m.k, "n_points": m.n_points, "closed": m.closed,
                       "max_tangency_deg": m.max_tangency_deg, "u_spread": m.u_spread}
                      for m in report.manifolds],
        "points": [{"position": p.position, "u": p.u_value, "eigenvalues": p.eigenvalues,
                    "k": p.stratum_k, "residual": p.cylinder_residual}
                   for p in report.points],
        "unclassified": report.unclassified,
        "profiles": profiles,
        "tolerances": report.tolerances,
        "config": config,
    }


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, config: dict, version: str, timings: dict, outputs, inputs=()) -> None:
    write_json(path, {
        "tool": "mcf_arrival",
        "version": version,
        "config": config,
        "timings_s": timings,
        "inputs": {str(Path(p).name): sha256(p) for p in inputs},
        "outputs": {str(Path(p).name): sha256(p) for p in outputs},
    })
