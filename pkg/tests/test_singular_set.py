import numpy as np
import pytest

from mcf_arrival.analysis import (CriticalPoint, c2_verdict, cluster_singular_times,
                                  fit_singular_manifold, hessian_tangent_lipschitz)
from mcf_arrival.errors import InsufficientDataError, InvalidParameterError

from synthetic import cylinder_hessian, line_points, ring_points


def at_times(values):
    return [CriticalPoint.from_hessian([i, 0.0], v, -np.eye(2), 1) for i, v in enumerate(values)]


class TestClusters:
    def test_one_cluster(self):
        assert len(cluster_singular_times(at_times([0.5, 0.501, 0.499]), 0.01)) == 1

    def test_neck_and_bulbs(self):
        cl = cluster_singular_times(at_times([0.011, 0.0112, 0.12, 0.121]), 0.02)
        assert [len(c.members) for c in cl] == [2, 2]
        assert cl[0].time < cl[1].time

    def test_single_linkage_chains(self):
        assert len(cluster_singular_times(at_times([0.1, 0.2, 0.3]), 0.15)) == 1

    def test_bad_inputs(self):
        with pytest.raises(InvalidParameterError):
            cluster_singular_times([], 0.1)
        with pytest.raises(InvalidParameterError):
            cluster_singular_times(at_times([0.1]), 0.0)


class TestManifold:
    def test_synthetic_ring(self):
        comps = fit_singular_manifold(ring_points(64), h=0.05)
        assert len(comps) == 1
        c = comps[0]
        assert c.k == 1 and c.closed and c.n_points == 64
        assert c.max_tangency <= 1e-6
        assert c.u_spread == 0.0

    def test_antipodal_arcs(self):
        phi = np.r_[np.linspace(-0.6, 0.6, 13), np.pi + np.linspace(-0.6, 0.6, 13)]
        comps = fit_singular_manifold(ring_points(phi=phi), h=0.05)
        assert len(comps) == 2
        assert not any(c.closed for c in comps)

    def test_torus_run(self, torus_run, torus_points):
        comps = fit_singular_manifold(torus_points, torus_run.u.spec.spacing)
        assert len(comps) == 1
        c = comps[0]
        assert c.k == 1 and c.closed
        assert c.max_tangency_deg <= 5 and c.u_spread <= 0.005

    def test_mixed_strata_is_a_witness(self):
        pts = line_points(6)
        pts.append(CriticalPoint.from_hessian([0.3, 0, 0], 0.5, -0.5 * np.eye(3), 2))
        report = c2_verdict(pts, h=0.05)
        assert report.verdict == "notC2"
        assert report.witness == "mixed strata"


class TestLipschitz:
    def test_synthetic_ring_bound(self):
        pts = ring_points(64)
        comp = fit_singular_manifold(pts, 0.05)[0]
        ratio = hessian_tangent_lipschitz(pts, comp)
        assert ratio is not None
        assert ratio <= np.sqrt(2) + 1e-6

    def test_torus_run(self, torus_run, torus_points):
        comp = fit_singular_manifold(torus_points, torus_run.u.spec.spacing)[0]
        assert hessian_tangent_lipschitz(torus_points, comp) <= 5

    def test_collinear_has_no_variation(self):
        pts = line_points(16)
        comp = fit_singular_manifold(pts, 0.05)[0]
        assert hessian_tangent_lipschitz(pts, comp) is None

    def test_too_few_points(self):
        pts = line_points(5)
        comp = fit_singular_manifold(pts, 0.05)[0]
        with pytest.raises(InsufficientDataError):
            hessian_tangent_lipschitz(pts, comp)


class TestVerdict:
    def test_sphere_run(self, sphere_run):
        from mcf_arrival.analysis import find_critical_points
        pts = find_critical_points(sphere_run.u)
        report = c2_verdict(pts, sphere_run.u.spec.spacing)
        assert report.verdict == "C2"
        assert len(report.manifolds) == 1 and report.manifolds[0].k == 0

    def test_torus_run(self, torus_run, torus_points):
        report = c2_verdict(torus_points, torus_run.u.spec.spacing)
        assert report.verdict == "C2"
        assert report.witness is None

    def test_dumbbell_run(self, dumbbell_run, dumbbell_points):
        report = c2_verdict(dumbbell_points, dumbbell_run.u.spec.spacing)
        assert report.verdict == "notC2"
        assert report.witness == "multiple singular times"
        assert len(report.time_clusters) >= 2

    def test_strict_angle_names_tangency(self):
        pts = ring_points(64)
        tilted = []
        for p in pts:  # rotate every kernel by ~3 degrees out of the ring plane
            t = p.kernel_basis()[:, 0] + np.array([0, 0, 0.05])
            tilted.append(CriticalPoint.from_hessian(p.position, p.u_value,
                                                     cylinder_hessian(t), 2))
        assert c2_verdict(tilted, 0.05).verdict == "C2"
        strict = c2_verdict(tilted, 0.05, angle_tol_deg=1.0)
        assert strict.verdict == "inconclusive"
        assert any(c.name == "tangency" and not c.passed for c in strict.verdict_reasons)

    def test_open_arc_is_not_c2(self):
        phi = np.linspace(0, 1.0, 20)
        report = c2_verdict(ring_points(phi=phi), 0.05)
        assert report.verdict == "notC2"
        assert report.witness == "open singular set"

    def test_no_points(self):
        with pytest.raises(InvalidParameterError):
            c2_verdict([], 0.05)
