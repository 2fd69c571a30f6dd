import numpy as np
import pytest

from mcf_arrival import _kernels
from mcf_arrival.errors import (IncompleteSweepError, InvalidParameterError, PreconditionError,
                                StabilityError)
from mcf_arrival.evolve import EvolveParams, _advance, evolve, stable_dt, step
from mcf_arrival.grid import GridSpec, ScalarField, sample_implicit
from mcf_arrival.scenarios import make_circle, make_sphere, sample


class TestStableDt:
    def test_planar(self):
        spec = GridSpec((16, 16), (0, 0), 0.01)
        assert stable_dt(spec, EvolveParams(cfl=0.5)) == pytest.approx(1.25e-5)

    def test_axisymmetric_counts_azimuth(self):
        spec = GridSpec((16, 16), (0, 0), 0.01, axisymmetric=True)
        assert stable_dt(spec, EvolveParams(cfl=0.5)) == pytest.approx(0.5e-4 / 6)

    def test_three_d(self):
        spec = GridSpec((9, 9, 9), (0, 0, 0), 0.1)
        assert stable_dt(spec, EvolveParams(cfl=1.0)) == pytest.approx(1 / 600)


@pytest.mark.parametrize("kwargs", [
    {"epsilon": 0.0}, {"cfl": 1.5}, {"cfl": 0.0}, {"t_max": -1.0},
    {"record_stride": 0}, {"reinit_stride": -1},
])
def test_params_validated(kwargs):
    with pytest.raises(InvalidParameterError):
        EvolveParams(**kwargs)


def test_default_epsilon_scales_with_h():
    spec = GridSpec((16, 16), (0, 0), 0.02)
    assert EvolveParams().eps_for(spec) == pytest.approx(2e-4)
    assert EvolveParams(epsilon=0.3).eps_for(spec) == 0.3


class TestStep:
    def test_affine_unchanged(self):
        spec = GridSpec.box((-1, -1), (1, 1), 32)
        vals = 0.2 * spec.points()[..., 0] - 0.1 * spec.points()[..., 1]
        params = EvolveParams()
        out = step(ScalarField(spec, vals), stable_dt(spec, params), params)
        assert np.allclose(out.values[1:-1, 1:-1], vals[1:-1, 1:-1], atol=1e-13)

    def test_rejects_unstable_dt(self):
        spec = GridSpec.box((-1, -1), (1, 1), 32)
        params = EvolveParams()
        f = ScalarField(spec, np.zeros(spec.shape))
        with pytest.raises(StabilityError):
            step(f, 2 * stable_dt(spec, params), params)

    def test_rejects_arrival_fields(self):
        spec = GridSpec.box((-1, -1), (1, 1), 32)
        with pytest.raises(PreconditionError):
            step(ScalarField(spec, np.zeros(spec.shape), "arrival"), 1e-6, EvolveParams())


def front_radius(u, t, axis_points):
    """Radius of {u > t} along the positive x axis (linear interpolation)."""
    x, vals = axis_points
    inside = vals > t
    i = int(np.flatnonzero(inside)[-1])
    return x[i] + (vals[i] - t) / (vals[i] - vals[i + 1]) * (x[i + 1] - x[i])


@pytest.mark.parametrize("name,rate,tmax", [("circle", 2.0, 0.4), ("sphere", 4.0, 0.2)])
def test_front_follows_shrinking_ode(name, rate, tmax):
    shape = make_circle() if name == "circle" else make_sphere()
    v0 = sample(shape, 128)
    u, _ = evolve(v0)
    spec = v0.spec
    j = int(np.argmin(np.abs(spec.axes()[1])))
    x = spec.axes()[0]
    vals = u.u[:, j]
    keep = x >= 0
    for t in np.linspace(0.02, tmax, 6):
        r = front_radius(u, t, (x[keep], np.nan_to_num(vals[keep], nan=-1.0)))
        assert abs(r - np.sqrt(1 - rate * t)) <= 3 * spec.spacing


def test_incomplete_sweep_keeps_partial_field():
    v0 = sample(make_circle(), 64)
    with pytest.raises(IncompleteSweepError) as info:
        evolve(v0, EvolveParams(t_max=0.01))
    err = info.value
    assert err.arrival.partial
    centre = err.arrival.u[32, 32]
    assert np.isnan(centre)
    assert np.any(np.isfinite(err.arrival.u))
    assert err.diagnostics.rows


def test_evolve_rejects_empty_region():
    spec = GridSpec.box((-1, -1), (1, 1), 32)
    with pytest.raises(PreconditionError):
        evolve(ScalarField(spec, -np.ones(spec.shape)))


def test_monotone_sweep_and_unique_crossings():
    u, diag = evolve(sample(make_circle(), 96))
    assert diag.monotone_violations == 0
    assert diag.recross_events == 0
    pos = [row[2] for row in diag.rows]
    assert all(b <= a for a, b in zip(pos, pos[1:]))
    inside = sample(make_circle(), 96).values > 0
    assert np.array_equal(np.isfinite(u.u), inside)


def test_evolve_is_deterministic():
    v0 = sample(make_sphere(), 64)
    a, _ = evolve(v0)
    b, _ = evolve(v0)
    assert np.array_equal(np.nan_to_num(a.u, nan=-7), np.nan_to_num(b.u, nan=-7))


@pytest.mark.parametrize("axisymmetric", [False, True])
def test_compiled_kernel_matches_numpy(axisymmetric, rng):
    if axisymmetric:
        spec = GridSpec.box((-1.5, 0.0), (1.5, 1.5), 48, axisymmetric=True)
    else:
        spec = GridSpec.box((-1.5, -1.5), (1.5, 1.5), 48)
    pts = spec.points()
    v = 1.0 - np.hypot(pts[..., 0] * 1.3, pts[..., 1]) + 0.01 * rng.normal(size=spec.shape)
    dt, eps = stable_dt(spec, EvolveParams()), 0.02
    ref = _advance(v.copy(), spec, dt, eps, np.zeros(tuple(c + 2 for c in spec.counts)))
    out = np.empty_like(v)
    crossing = np.full(v.shape, np.nan)
    _kernels.step_record_2d(v.copy(), out, crossing, spec.spacing, dt, eps, axisymmetric,
                            0.0, 0.0, dt, 0.0)
    assert np.allclose(out, ref, rtol=1e-12, atol=1e-14)
    if axisymmetric:  # the axis row uses the limiting normal
        assert np.allclose(out[:, 0], ref[:, 0], rtol=1e-12, atol=1e-14)


def test_snapshots_written(tmp_path):
    v0 = sample(make_circle(), 32)
    evolve(v0, EvolveParams(record_stride=200), snapshot_dir=tmp_path)
    assert sorted(tmp_path.glob("snapshot_*.mcaf"))


def test_sample_implicit_matches_sample():
    shape = make_circle()
    assert np.array_equal(sample(shape, 40).values,
                          sample_implicit(shape, shape.grid(40)).values)
