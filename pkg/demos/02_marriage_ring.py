"""A thin torus shrinks onto a circle: the arrival time is C^2 there.

The torus of revolution (ring radius 1, tube radius 0.25) is simulated on the
meridian half-plane.  Every critical point sits on one circle, has Hessian
close to -diag(1, 1, 0) in the (radial, vertical, tangent) frame, and carries
the same arrival time, which is what a C^2 arrival time requires.
"""

import argparse

import numpy as np

from mcf_arrival import evolve, extinction_time, get_scenario, sample
from mcf_arrival.analysis import (ConeSpec, c2_verdict, cone_continuity_profile,
                                  find_critical_points, fit_singular_manifold,
                                  hessian_tangent_lipschitz, normal_alignment_profile,
                                  rescaled_profile)

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--n", type=int, default=256)
args = parser.parse_args()

u, diag = evolve(sample(get_scenario("torus"), args.n))
T, _ = extinction_time(u)
print(f"extinction at T = {T:.5f}; the local cylinder estimate r0^2/2 gives 0.03125")

points = find_critical_points(u)
report = c2_verdict(points, u.spec.spacing)
ring = np.hypot(points[0].position[1], points[0].position[2])
print(f"{len(points)} critical points on a circle of radius {ring:.4f}")
print(f"Hessian eigenvalues at one of them: {np.round(points[0].eigenvalues, 4)}")
for c in report.verdict_reasons:
    print(f"  {'ok ' if c.passed else 'FAIL'} {c.name}: {c.detail}")
print(f"verdict: {report.verdict}")

comp = fit_singular_manifold(points, u.spec.spacing)[0]
print(f"Hessian-vs-tangent Lipschitz ratio: {hessian_tangent_lipschitz(points, comp):.3f}")

# Near the ring the level sets look like shrinking cylinders around it.
p = points[0]
radii = (0.2, 0.1, 0.05)
cone = cone_continuity_profile(u, ConeSpec(p, 1.0, radii))
align = normal_alignment_profile(u, p, radii)
scaled = rescaled_profile(u, p, radii)
print("radius  |Hess - Hess(p)|  |axis part of n|  radial alignment  (n-k)|grad u|/rho")
for r, dev, al, ra, sp in zip(radii, cone.column("max_deviation"),
                              align.column("max_axis_component"),
                              scaled.column("radial_alignment"),
                              scaled.column("normalized_speed")):
    print(f"{r:6.3f}  {dev:16.4f}  {al:16.4f}  {ra:16.4f}  {sp:18.4f}")
print("The Hessian deviation shrinks linearly with the radius: the tube's core\n"
      "drifts inward while it shrinks, so Hess u has a first-order slope near the ring.")
