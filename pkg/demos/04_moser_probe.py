"""
Probing exponential integrability
=================================

For u in the unit seminorm ball, int (e^{alpha u^2} - 1) is bounded by
H_alpha ||u||_2^2 when alpha is small enough.  Trials only ever give lower
estimates of H_alpha; here we look at how they behave.
"""

import numpy as np

from fracnehari.grid import GridSpec, norms
from fracnehari.moser import concentration_scan, moser_integral, probe_H

grid = GridSpec(40.0, 2048, "periodic")

# Tiny amplitude: the integral is alpha ||u||_2^2 to first order
g = grid.field(lambda x: np.exp(-0.5 * x * x))
for alpha in (0.5, 1.0, 2.0):
    r = moser_integral(1e-3 * g, alpha) / (1e-6 * norms(g).l2_sq)
    print(f"alpha={alpha}: ratio {r:.6f}")

# Families of trials scaled into the unit ball
for family in ("gaussian", "bump", "log"):
    probe = probe_H(1.0, family, 16, grid)
    print(f"{family:>8s}: H_hat(1) >= {probe.H_hat:.4f}, trend {probe.concentration_trend()}")

# Concentrating log profiles: the ratio levels off for small alpha and
# keeps climbing for large alpha
scan_grid = GridSpec(20.0, 16384, "periodic")
scan = concentration_scan(scan_grid, (1.0, 2.0, 3.0, 4.0), np.geomspace(0.5, 4e-3, 12))
for line in scan.lines():
    print(" ", line)
