"""Property-based checks of the small algebraic building blocks."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from mcf_arrival.analysis import CriticalPoint, classify_stratum, cluster_singular_times
from mcf_arrival.arrival import crossing_time
from mcf_arrival.config import SCHEMA, load_config
from mcf_arrival.grid import SymmetricMatrix

finite = st.floats(-10, 10, allow_nan=False)


@st.composite
def cylinder_hessians(draw):
    n = draw(st.integers(1, 3))
    k = draw(st.integers(0, n - 1))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(n + 1, n + 1)))
    axis = q[:, :k]
    return n, k, -(np.eye(n + 1) - axis @ axis.T) / (n - k)


@settings(max_examples=200, deadline=None)
@given(cylinder_hessians())
def test_exact_cylinders_classify(case):
    n, k, hess = case
    s = classify_stratum(hess, n, 0.4 / n)
    I = np.eye(n + 1)
    P, Pi = s.axis_projector, s.complement_projector
    assert s.k == k and s.residual < 1e-10
    assert np.allclose(P @ P, P) and np.allclose(Pi @ Pi, Pi)
    assert np.allclose(P + Pi, I) and np.allclose(P @ Pi, 0)
    assert round(np.trace(P)) == k


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 10), st.floats(-10, 0), st.floats(0, 5), st.floats(1e-6, 1))
def test_crossing_time_in_step(v_prev, v_next, t0, dt):
    t = crossing_time(v_prev, v_next, t0, t0 + dt)
    assert t0 <= t <= t0 + dt + 1e-12


@given(st.lists(finite, min_size=6, max_size=6))
def test_symmetric_round_trip(entries):
    m = SymmetricMatrix.from_upper(3, entries)
    assert np.array_equal(SymmetricMatrix.from_upper(3, m.upper).matrix, m.matrix)
    vals, vecs = m.eig()
    assert np.allclose(vecs @ np.diag(vals) @ vecs.T, m.matrix, atol=1e-8)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(1e-3, 0.5))
def test_clusters_partition_with_gaps(values, tol):
    pts = [CriticalPoint.from_hessian([0.0, 0.0], v, -np.eye(2), 1) for v in values]
    clusters = cluster_singular_times(pts, tol)
    members = sorted(i for c in clusters for i in c.members)
    assert members == list(range(len(values)))
    for a, b in zip(clusters, clusters[1:]):
        hi = max(values[i] for i in a.members)
        lo = min(values[i] for i in b.members)
        assert lo - hi > tol


@given(st.integers(8, 4096), st.integers(0, 10 ** 6), st.floats(1e-3, 1.0))
def test_config_overrides_round_trip(n, seed, cfl):
    cfg = load_config(overrides=[f"grid.n={n}", f"seed={seed}", f"evolve.cfl={cfl!r}"])
    assert (cfg["grid.n"], cfg["seed"], cfg["evolve.cfl"]) == (n, seed, cfl)
    assert list(cfg.echo()) == list(SCHEMA)
