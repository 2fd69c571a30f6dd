"""Run configuration: ``key = value`` text files with dotted keys.

Blank lines and ``#`` comments are ignored.  ``auto`` selects a
resolution-dependent default where one exists.  Unknown keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

AUTO = "auto"

# key -> (default, type); type "floats" is a comma-separated list
SCHEMA: dict[str, tuple[object, str]] = {
    "scenario.name": ("circle", "str"),
    "scenario.R": (1.0, "float"),
    "scenario.a": (1.0, "float"),
    "scenario.b": (0.5, "float"),
    "scenario.R0": (1.0, "float"),
    "scenario.r0": (0.25, "float"),
    "scenario.bulb_r": (0.5, "float"),
    "scenario.neck_r": (0.15, "float"),
    "scenario.sep": (0.75, "float"),
    "grid.n": (256, "int"),
    "evolve.epsilon": (AUTO, "float"),
    "evolve.cfl": (0.4, "float"),
    "evolve.t_max": (10.0, "float"),
    "evolve.record_stride": (100, "int"),
    "evolve.reinit_stride": (0, "int"),
    "analysis.tau": (AUTO, "float"),
    "analysis.tol": (0.1, "float"),
    "analysis.time_tol": (AUTO, "float"),
    "analysis.angle_tol": (5.0, "float"),
    "analysis.grad_floor": (0.05, "float"),
    "analysis.cone_c": (1.0, "float"),
    "analysis.radii": ((0.2, 0.1, 0.05), "floats"),
    "analysis.samples": (512, "int"),
    "analysis.delta": (0.2, "float"),
    "output.dir": ("out", "str"),
    "seed": (0, "int"),
}

SCENARIO_KEYS = {
    "circle": ("R",), "sphere": ("R",), "ellipse": ("a", "b"),
    "torus": ("R0", "r0"), "dumbbell": ("bulb_r", "neck_r", "sep"),
}

# zero is meaningful for these; every other number must be positive
_NON_NEGATIVE = {"evolve.reinit_stride", "seed"}


def _parse(key: str, raw: str):
    default, kind = SCHEMA[key]
    raw = raw.strip()
    if raw == AUTO and default == AUTO:
        return AUTO
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind}") from None


@dataclass(frozen=True)
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, auto=None):
        """Value of ``key``, with ``auto`` substituted for the AUTO marker."""
        v = self.values[key]
        return auto if v == AUTO else v

    def scenario_params(self) -> dict:
        name = self.values["scenario.name"]
        return {k: self.values[f"scenario.{k}"] for k in SCENARIO_KEYS[name]}

    def echo(self) -> dict:
        """Resolved values in schema order; what every artifact records."""
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.values.items()}

    def with_overrides(self, **changes) -> "RunConfig":
        values = dict(self.values)
        values.update(changes)
        return validate(values)


def validate(values: dict) -> RunConfig:
    name = values["scenario.name"]
    if name not in SCENARIO_KEYS:
        raise ConfigError(f"scenario.name: unknown scenario {name!r}; "
                          f"choose from {sorted(SCENARIO_KEYS)}")
    if values["grid.n"] < 8:
        raise ConfigError(f"grid.n = {values['grid.n']}: grids need at least 8 nodes per axis")
    for key, (_, kind) in SCHEMA.items():
        v = values[key]
        if v == AUTO or kind == "str":
            continue
        nums = v if kind == "floats" else (v,)
        if kind == "floats" and not nums:
            raise ConfigError(f"{key}: empty list")
        limit_ok = (lambda x: x >= 0) if key in _NON_NEGATIVE else (lambda x: x > 0)
        if not all(limit_ok(x) for x in nums):
            raise ConfigError(f"{key} = {v}: must be {'>= 0' if key in _NON_NEGATIVE else '> 0'}")
    radii = values["analysis.radii"]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("analysis.radii must be strictly decreasing")
    if values["evolve.cfl"] > 1:
        raise ConfigError("evolve.cfl must lie in (0, 1]")
    return RunConfig(values)


def parse_lines(lines, source: str = "<config>") -> dict:
    out = {}
    for number, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{source}:{number}: expected 'key = value'")
        key, raw = (part.strip() for part in text.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        out[key] = _parse(key, raw)
    return out


def load_config(path=None, overrides=(), seed: int | None = None,
                out: str | None = None) -> RunConfig:
    """Defaults, then the file at ``path``, then ``key=value`` overrides, then flags."""
    values = {k: d for k, (d, _) in SCHEMA.items()}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        values.update(parse_lines(text.splitlines(), str(path)))
    values.update(parse_lines(overrides, "--set"))
    if seed is not None:
        values["seed"] = int(seed)
    if out is not None:
        values["output.dir"] = out
    return validate(values)
