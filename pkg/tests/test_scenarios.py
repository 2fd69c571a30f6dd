import numpy as np
import pytest

from mcf_arrival.errors import (InvalidParameterError, NoPinchError, NotMeanConvexError,
                                OutsideDomainError, ShapeRejectedError)
from mcf_arrival.scenarios import (dumbbell_profile, exact_arrival_cylinder, exact_arrival_sphere,
                                   get_scenario, initial_mean_curvature, make_circle,
                                   make_dumbbell, make_ellipse, make_sphere, make_torus)
from mcf_arrival.analysis import classify_stratum


class TestOracles:
    @pytest.mark.parametrize("n,x,want", [(1, [0, 0], 0.5), (2, [0, 0, 0], 0.25),
                                          (2, [1, 0, 0], 0.0)])
    def test_sphere(self, n, x, want):
        assert exact_arrival_sphere(1.0, n, x) == pytest.approx(want)

    def test_sphere_outside(self):
        with pytest.raises(OutsideDomainError):
            exact_arrival_sphere(1.0, 2, [1.1, 0, 0])

    def test_cylinder(self):
        assert exact_arrival_cylinder(1.0, 2, 1, 0.0) == pytest.approx(0.5)
        assert exact_arrival_cylinder(1.0, 2, 1, 1.0) == pytest.approx(0.0)
        with pytest.raises(InvalidParameterError):
            exact_arrival_cylinder(1.0, 2, 2, 0.0)

    def test_cylinder_hessian_classifies_k1(self):
        h = 1e-3
        f = lambda y, z: exact_arrival_cylinder(1.0, 2, 1, np.hypot(y, z))  # noqa: E731
        hyy = (f(h, 0) - 2 * f(0, 0) + f(-h, 0)) / h ** 2
        hess = np.diag([0.0, hyy, hyy])
        assert np.sort(np.diag(hess)) == pytest.approx([-1, -1, 0])
        assert classify_stratum(hess, 2, 0.1).k == 1


class TestShapes:
    def test_circle_centre(self):
        assert make_circle(1.0).implicit(np.array([0.0, 0.0])) == pytest.approx(1.0)

    def test_sphere_expected(self):
        e = make_sphere(1.0).expected
        assert e["verdict"] == "C2" and e["k"] == 0 and e["n_singular_times"] == 1
        assert e["T"] == pytest.approx(0.25)

    def test_ellipse_has_no_time_oracle(self):
        e = make_ellipse(1.0, 0.5).expected
        assert e["verdict"] == "C2" and e["k"] == 0 and "T" not in e

    def test_torus_tube_centre(self):
        t = make_torus(1.0, 0.25)
        assert t.implicit(np.array([0.0, 1.0])) == pytest.approx(0.25)
        assert t.expected["T"] == pytest.approx(0.03125)

    def test_fat_torus_warns(self):
        t = make_torus(1.0, 0.5)
        assert t.warnings and t.expected is None

    def test_thick_neck_rejected(self):
        with pytest.raises(ShapeRejectedError):
            make_dumbbell(0.5, 0.4, 0.6)

    def test_thick_neck_reason(self):
        with pytest.raises((NoPinchError, NotMeanConvexError)):
            make_dumbbell(0.5, 0.4, 0.6)

    def test_default_dumbbell_is_mean_convex(self):
        shape = make_dumbbell()
        assert shape.expected["verdict"] == "notC2"
        assert initial_mean_curvature(shape).min() > -0.05

    def test_dumbbell_profile_is_tangent(self):
        radius, scale, shift, xj = dumbbell_profile(0.5, 0.15, 0.75)
        assert radius(0.0) == pytest.approx(0.15)
        bulb = lambda x: np.sqrt(0.25 - (x - 0.75) ** 2)  # noqa: E731
        assert radius(xj) == pytest.approx(bulb(xj), abs=1e-6)
        d = 1e-5
        assert (radius(xj) - radius(xj - d)) / d == pytest.approx(
            (bulb(xj + d) - bulb(xj)) / d, rel=1e-3)

    def test_registry(self):
        assert get_scenario("torus", R0=1.0, r0=0.2).params["r0"] == 0.2
        with pytest.raises(InvalidParameterError):
            get_scenario("cube")


def test_dumbbell_run_two_times(dumbbell_run, dumbbell_points):
    times = sorted({round(p.u_value, 3) for p in dumbbell_points})
    assert times[0] < 0.03 and times[-1] > 0.05
