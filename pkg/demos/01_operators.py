"""
The half Laplacian on a grid
============================

The Benjamin-Ono soliton u(x) = 2/(1+x^2) has a closed-form half Laplacian,
which makes it a clean yardstick for the two boundary treatments.
"""

import numpy as np

from fracnehari.grid import GridSpec, frac_laplacian, frac_laplacian_singular, norms
from fracnehari.oracle import soliton, soliton_laplacian

# Two grids on [-80, 80): the torus, and the lattice operator on the whole line
for boundary in ("periodic", "free"):
    grid = GridSpec(80.0, 4096, boundary)
    u = soliton(grid)
    x = grid.x
    inner = np.abs(x) <= 10
    err = np.max(np.abs(frac_laplacian(u).values - soliton_laplacian(x))[inner])
    print(f"{boundary:>8s}: max error of (-Delta)^(1/2) u on |x| <= 10: {err:.2e}")

# The periodic error is not discretization error: it is the sum of the
# operator applied to the periodic images of u, which decay only like 1/x^2.

# Closed forms: ||u||_2^2 = 2 pi and the seminorm squared is pi
n = norms(soliton(GridSpec(80.0, 4096, "free")))
print(f"l2_sq = {n.l2_sq:.6f}  (2 pi = {2 * np.pi:.6f})")
print(f"seminorm_sq = {n.seminorm_sq:.6f}  (pi = {np.pi:.6f})")

# A second route to the same operator: the singular integral, evaluated at
# a few points by direct quadrature rather than by Fourier multipliers
grid = GridSpec(80.0, 4096, "periodic")
pts = np.array([0.0, 1.25, 2.5])  # grid points: multiples of h = 5/128
u = soliton(grid)
print("singular integral vs closed form:")
for p in pts:
    v = frac_laplacian_singular(u, p, cutoff=grid.spacing)
    print(f"  x={p:5.2f}: {v: .6f}  exact {soliton_laplacian(p): .6f}")
