"""
Computing a ground state
========================

Gradient descent in the H^{1/2} inner product, rescaled onto the Nehari
manifold after every step.  For f(s) = |s|s the minimizer is the soliton.
"""

import math

import numpy as np

from fracnehari.functional import ground_energy_upper_bound, norm_sq_upper_bound, sq_estimate
from fracnehari.grid import GridSpec
from fracnehari.nonlinearity import make_builtin, min_Cq
from fracnehari.oracle import soliton
from fracnehari.solver import SolveConfig, recenter, solve, vanishing_monitor

grid = GridSpec(80.0, 4096, "free")

# Start from a Gaussian; the solver projects it first
u, rep, trace = solve(SolveConfig(grid, make_builtin("pure_power", p=2)))
print(f"{trace.termination} after {trace.iterations} iterations")
print(f"J = {rep.J:.8f}   pi/2 = {math.pi / 2:.8f}")
centered, _ = recenter(u, 5.0)
print(f"sup distance to 2/(1+x^2): {np.max(np.abs(centered.values - soliton(grid).values)):.2e}")

# Energy never increases, and every iterate sits on the Nehari manifold
J = trace.column("J")
print("first J values:", np.array2string(J[:4], precision=6))
print(f"largest |Phi|/||u||^2 over the run: {trace.constraint_defect():.1e}")
print(vanishing_monitor(trace, u, 5.0, 0.1).message)

# The critical nonlinearity: compare with the explicit upper bounds
grid = GridSpec(80.0, 4096, "periodic")
for lam in (20, 40, 80):
    nl = make_builtin("paper_critical", lam=lam, q=4, alpha0=math.pi / 4)
    u, rep, trace = solve(SolveConfig(grid, nl))
    C_q = min_Cq(nl, 4)
    S = sq_estimate(grid, 4).value
    print(f"lambda={lam:3d}: J={rep.J:.5f} <= {ground_energy_upper_bound(4, C_q, S):.5f}, "
          f"||u||^2={rep.norm_sq:.4f} <= {norm_sq_upper_bound(4, C_q, 4, S):.4f}")
