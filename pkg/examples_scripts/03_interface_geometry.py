"""Measure a diffuse interface three ways.

For a circle of radius 1/4 the diffuse surface energy, the length of the
traced zero contour and the perimeter should all be close to pi/2, and the
diffuse mean curvature should have length 1/R = 4 across the interface.
"""
import math

import numpy as np

from torusflow import GridSpec, ProfileParams, Scenario, initial_phase
from torusflow import diagnostics

grid = GridSpec(2, 256)
eps = 0.02
phi = initial_phase(Scenario(radius=0.25), ProfileParams(eps), grid)

curve = diagnostics.extract_interface(phi, grid)
print(f"perimeter            {math.pi / 2:.6f}")
print(f"diffuse surface      {diagnostics.surface_measure(phi, eps, grid):.6f}")
print(f"zero-contour length  {curve.length:.6f}")
print(f"contour curvature    median {np.median(curve.curvature[0]):.4f}")

H, mask = diagnostics.mean_curvature_field(phi, eps, grid)
w = diagnostics.surface_density(phi, eps, grid) * mask
mean_H = np.sum(np.sqrt(np.sum(H * H, axis=0)) * w) / np.sum(w)
print(f"diffuse |H|          {mean_H:.4f} (1/R = 4)")

D, per_radius = diagnostics.density_ratio(phi, eps, grid, per_radius=True)
print(f"density ratio        {D:.4f}")
for r, value in sorted(per_radius.items()):
    print(f"  r = {r:.4f}: {value:.4f}")
