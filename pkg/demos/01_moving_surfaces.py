#!/usr/bin/env python3
"""Tour of the moving surfaces and their meshes.

Builds each analytic surface, meshes it, advances the mesh along the exact
node motion, and writes a couple of VTK snapshots you can open in ParaView.
"""

import numpy as np

from escher import (
    ConstantAreaTorus,
    OscillatingSphere,
    PeriodicTorus,
    advance_mesh,
    build_icosphere,
    build_torus_mesh,
    mesh_quality,
    mesh_size_h,
    surface_area,
    write_vtk,
)

# --- an oscillating sphere: radius sqrt(0.9 + 0.1 cos(20 pi t)) -------------
sphere = OscillatingSphere()
mesh = build_icosphere(sphere, 3)
print(f"icosphere: {mesh.node_count} nodes, {mesh.triangle_count} triangles, "
      f"h = {mesh_size_h(mesh):.4f}")

for t in (0.0, 0.025, 0.05):
    snap = advance_mesh(mesh, t)
    radius = np.linalg.norm(snap.nodes, axis=1).mean()
    print(f"  t = {t:5.3f}: mean radius {radius:.6f}, area {surface_area(snap):.6f}")

# --- a torus that stretches while keeping its area constant ----------------
torus = ConstantAreaTorus()
tmesh = build_torus_mesh(torus, 48, 16)
print(f"\ntorus: {tmesh.node_count} nodes, {tmesh.triangle_count} triangles")
print(f"target area 3 pi^2 / 4 = {3 * np.pi**2 / 4:.6f}")
for t in (0.0, 0.5, 1.0):
    snap = advance_mesh(tmesh, t)
    print(f"  t = {t:4.2f}: area {surface_area(snap):.6f}, "
          f"quality {mesh_quality(snap):.3f}")

# --- snapshots for visualisation -------------------------------------------
write_vtk(advance_mesh(tmesh, 0.0), {}, "torus_t0.vtk")
write_vtk(advance_mesh(tmesh, 1.0), {}, "torus_t1.vtk")
print("\nwrote torus_t0.vtk and torus_t1.vtk")

# the periodic torus breathes with period 0.1
breathing = PeriodicTorus()
r = [breathing._radii(t)[1] for t in np.linspace(0, 0.1, 5)]
print("periodic torus minor radius over one period:", np.round(r, 4))
