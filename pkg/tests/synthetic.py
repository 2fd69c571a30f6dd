"""Constructed critical-point sets with exact cylinder Hessians."""

import numpy as np

from mcf_arrival.analysis import CriticalPoint


def cylinder_hessian(axis):
    t = np.asarray(axis, dtype=float)
    t = t / np.linalg.norm(t)
    return -(np.eye(3) - np.outer(t, t))  # n = 2, k = 1


def ring_points(count=64, radius=1.0, u_value=0.5, phi=None):
    phi = 2 * np.pi * np.arange(count) / count if phi is None else np.asarray(phi)
    pts = []
    for a in phi:
        pos = radius * np.array([np.cos(a), np.sin(a), 0.0])
        tangent = np.array([-np.sin(a), np.cos(a), 0.0])
        pts.append(CriticalPoint.from_hessian(pos, u_value, cylinder_hessian(tangent), 2))
    return pts


def line_points(count=16, spacing=0.05, u_value=0.5):
    return [CriticalPoint.from_hessian([i * spacing, 0, 0], u_value,
                                       cylinder_hessian([1, 0, 0]), 2) for i in range(count)]
