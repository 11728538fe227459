#!/usr/bin/env python3
"""Calibrate the mesh / prolongation / norm pipeline without any PDE.

Interpolating a smooth function on a refining icosphere and comparing
against a fine interpolant must show second order in L2 and first order in
the H1 seminorm; anything else means the geometry machinery is off.
"""

import numpy as np

from escher import StaticSphere
from escher.studies import interpolation_eoc


def f(p):
    return np.sin(p[..., 0] + 2.0 * p[..., 1]) * np.exp(p[..., 2])


table_l2, table_h1 = interpolation_eoc(StaticSphere(), 1, 4, f, reference_extra=2)
print(table_l2)
print()
print(table_h1)

slope = np.polyfit(np.log(table_l2.hs), np.log(table_l2.errors), 1)[0]
print(f"\nfitted L2 slope: {slope:.3f} (expect 2)")
slope = np.polyfit(np.log(table_h1.hs), np.log(table_h1.errors), 1)[0]
print(f"fitted H1 slope: {slope:.3f} (expect 1)")
