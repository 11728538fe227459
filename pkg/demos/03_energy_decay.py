#!/usr/bin/env python3
"""Energy decay of phase separation on a stationary sphere.

On a fixed surface both schemes dissipate the interfacial energy step by
step; the implicit-explicit splitting does so for any timestep size.  The
script starts from a random smooth mixture, runs the splitting scheme, and
prints the energy trajectory at a glance.
"""

import numpy as np

from escher import StaticSphere, build_icosphere, quartic_potential, run_simulation
from escher.solver import SchemeConfig

mesh = build_icosphere(StaticSphere(), 3)
pot = quartic_potential()

rng = np.random.default_rng(1)
x, y, z = mesh.nodes.T
u0 = np.tanh(3.0 * (rng.uniform(-1, 1) * x + rng.uniform(-1, 1) * y
                    + rng.uniform(-1, 1) * z + rng.uniform(-1, 1) * x * y))

cfg = SchemeConfig(eps=0.1, tau=1e-3, t_end=0.05, scheme="imex")
result = run_simulation(cfg, mesh, u0, pot)

print("step  time     energy        mass")
for r in result.records[::5]:
    print(f"{r.step:4d}  {r.time:6.3f}  {r.energy:12.6f}  {r.mass:+.3e}")

energies = np.array([r.energy for r in result.records])
assert np.all(np.diff(energies) <= 1e-10), "energy rose on a stationary surface"
print(f"\nenergy fell monotonically from {energies[0]:.4f} to {energies[-1]:.4f}")
print(f"largest per-step change: {np.diff(energies).min():.3e}")
