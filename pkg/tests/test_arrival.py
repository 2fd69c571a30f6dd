import numpy as np
import pytest

from mcf_arrival.arrival import (ArrivalField, crossing_time, eq12_residual, extinction_time,
                                 lipschitz_estimate, residual_map)
from mcf_arrival.errors import InvalidCrossingError, NearCriticalError, PartialFieldError


class TestCrossingTime:
    def test_interpolates(self):
        assert crossing_time(0.3, -0.1, 1.0, 1.1) == pytest.approx(1.075)

    def test_lands_on_node(self):
        assert crossing_time(0.5, 0.0, 2.0, 2.5) == pytest.approx(2.5)

    def test_no_sign_change(self):
        with pytest.raises(InvalidCrossingError):
            crossing_time(0.1, 0.1, 0.0, 1.0)


class TestResidual:
    def test_circle_oracle_at_half(self, oracles):
        u = oracles["circle"]
        idx = tuple(np.argwhere(np.isclose(np.linalg.norm(u.spec.points(), axis=-1), 0.5,
                                           atol=0.6 * u.spec.spacing))[0])
        assert abs(eq12_residual(u, idx)) <= 1e-10

    def test_cylinder_oracle_at_half(self, oracles):
        u = oracles["cylinder"]
        j = int(np.argmin(np.abs(u.spec.axes()[1] - 0.5)))
        assert abs(eq12_residual(u, (64, j))) <= 1e-10

    def test_near_critical(self, oracles):
        u = oracles["sphere"]
        i = int(np.argmin(np.abs(u.spec.axes()[0])))
        with pytest.raises(NearCriticalError):
            eq12_residual(u, (i, 0))

    def test_map_agrees_with_nodes(self, oracles):
        u = oracles["sphere"]
        res = residual_map(u)
        for idx in [(40, 10), (64, 30), (80, 0)]:
            assert res[idx] == pytest.approx(eq12_residual(u, idx), abs=1e-12)

    @pytest.mark.parametrize("name", ["circle", "sphere", "cylinder"])
    def test_oracle_medians(self, oracles, name):
        res = residual_map(oracles[name], 0.05)
        assert np.median(np.abs(res[np.isfinite(res)])) <= 1e-8


class TestExtinction:
    def test_circle_run(self, circle_run):
        T, idx = extinction_time(circle_run.u)
        assert T == pytest.approx(0.5, abs=0.01)
        assert np.linalg.norm(circle_run.u.spec.position(idx)) <= 2 * circle_run.u.spec.spacing

    def test_torus_run_max_on_ring(self, torus_run):
        T, idx = extinction_time(torus_run.u)
        rho = torus_run.u.spec.position(idx)[1]
        assert 0.9 < rho < 1.05

    def test_partial(self, oracles):
        u = oracles["circle"]
        with pytest.raises(PartialFieldError):
            extinction_time(ArrivalField(u.spec, u.u, partial=True))


def test_lipschitz_of_circle_run(circle_run):
    # |grad u| = 1/H = |x| <= 1 inside the unit circle
    assert lipschitz_estimate(circle_run.u) <= 1.05


def test_interpolated_queries_match_oracle(oracles, rng):
    u = oracles["sphere"]
    pts = rng.uniform(-0.5, 0.5, size=(50, 3))
    exact = (1 - np.sum(pts ** 2, axis=-1)) / 4
    h = u.spec.spacing
    assert u.value(pts) == pytest.approx(exact, abs=h * h / 4)  # bilinear in the meridian
    assert u.gradient(pts) == pytest.approx(-pts / 2, abs=1e-9)
    hs = u.hessian(pts)
    assert np.allclose(hs, -0.5 * np.eye(3), atol=1e-8)


def test_from_function_masks_outside(oracles):
    u = oracles["circle"]
    outside = np.linalg.norm(u.spec.points(), axis=-1) > 1.0 + 1e-12
    assert np.all(np.isnan(u.u[outside]))
