"""
Denoising a cube without rounding its edges
===========================================

A welded cube is corrupted by noise along the vertex normals and then
filtered with two kernel widths. The narrow anisotropic kernel keeps the
right angles at the cube edges; the wide one rounds them off.

Run with ``python3 demos/denoise_cube.py [output_dir]``.
"""

import sys
from pathlib import Path

import numpy as np

from hmls import FilterParams, NoiseSpec, add_noise, filter_mesh, save_mesh
from hmls.metrics import dihedral_angles, signed_distance_map
from hmls.shapes import cube

out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out_dir.mkdir(exist_ok=True)

###############################################################################
# Ground truth and noise. Magnitudes are in units of the mean edge length.

clean = cube(32)
noisy = add_noise(clean, NoiseSpec("uniform-normal-direction", 0.1, seed=7))
print(f"{clean.n_vertices} vertices, {clean.n_faces} faces")

###############################################################################
# The edges of the cube: both endpoints lie on the same cube edge.

edges, _ = dihedral_angles(clean)
a, b = clean.vertices[edges[:, 0]], clean.vertices[edges[:, 1]]
features = edges[((a == b) & np.isin(a, [0.0, 1.0])).sum(axis=1) >= 2]


def surface_error(mesh):
    return np.abs(signed_distance_map(mesh, clean)[0]).mean()


def crease(mesh):
    return np.median(dihedral_angles(mesh, features)[1])


print(f"noisy     error {surface_error(noisy):.5f}  median crease {crease(noisy):6.2f} deg")

###############################################################################
# Filter with a narrow and a wide anisotropic kernel, 5 iterations each.

results = {}
for sigma in (0.05, 0.2):
    params = FilterParams(sigma_s_factor=sigma, iterations=5)
    result = results[sigma] = filter_mesh(noisy, params)
    print(f"sigma {sigma:<4} error {surface_error(result):.5f}  median crease {crease(result):6.2f} deg")
    save_mesh(result, out_dir / f"cube_sigma_{sigma}.ply")

###############################################################################
# Color the narrow-kernel result by signed distance to the clean cube.

signed, colors = signed_distance_map(results[0.05], clean)
print(f"signed distance range [{signed.min():.4f}, {signed.max():.4f}]")
save_mesh(results[0.05], out_dir / "cube_signed_distance.ply", colors=colors)
save_mesh(noisy, out_dir / "cube_noisy.ply")
