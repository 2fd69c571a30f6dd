"""Singular-set analysis of an arrival-time field."""

from .critical import CLASSIFY_TOL, CriticalPoint, Stratum, classify_stratum, find_critical_points
from .profiles import (ConeSpec, GeometryProbe, Profile, cone_continuity_profile, frame_check_field,
                       frame_checks, geometry_probe, local_structure_checks,
                       normal_alignment_profile, rescaled_profile, sphere_directions,
                       transverse_max_point)
from .singular_set import (Condition, ManifoldComponent, SingularSetReport, TimeCluster,
                           c2_verdict, cluster_singular_times, fit_singular_manifold,
                           hessian_tangent_lipschitz)

__all__ = [
    "CLASSIFY_TOL", "Condition", "ConeSpec", "CriticalPoint", "GeometryProbe",
    "ManifoldComponent", "Profile", "SingularSetReport", "Stratum", "TimeCluster",
    "c2_verdict", "classify_stratum", "cluster_singular_times", "cone_continuity_profile",
    "find_critical_points", "fit_singular_manifold", "frame_check_field", "frame_checks",
    "geometry_probe", "hessian_tangent_lipschitz", "local_structure_checks",
    "normal_alignment_profile", "rescaled_profile", "sphere_directions", "transverse_max_point",
]
