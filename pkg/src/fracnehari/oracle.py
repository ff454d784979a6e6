"""Closed-form checks built on the Benjamin-Ono soliton ``u*(x) = 2 / (1 + x^2)``.

``u*`` solves ``(-Delta)^(1/2) u + u = u^2`` exactly, with

    (-Delta)^(1/2) u* = 2 (1 - x^2) / (1 + x^2)^2
    ||u*||_2^2 = 2 pi,  seminorm^2 = pi,  int u*^3 = 3 pi,  J(u*) = pi / 2

and Nehari scales 1 for ``u*`` and 1/2 for ``2 u*``.

Tolerances form a ladder.  Quadrature rows (the three norms) get a loose
tolerance once the spacing exceeds ``RESOLVED_SPACING``; the energy row and
the residual rows (operator error, Nehari defect and scales, dual residual)
always use their strict tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functional import energy, nehari_scale
from .grid import GridSpec, frac_laplacian, norms
from .nonlinearity import make_builtin

RESOLVED_SPACING = 0.1
LOOSE_TOLERANCE = 1e-2


def soliton(grid: GridSpec):
    return grid.field(lambda x: 2.0 / (1.0 + x * x))


def soliton_laplacian(x):
    return 2.0 * (1.0 - x * x) / (1.0 + x * x) ** 2


def soliton_window_mass(R: float) -> float:
    """``int_{-R}^{R} u*^2 = 4 (arctan R + R / (1 + R^2))``."""
    return 4.0 * (math.atan(R) + R / (1.0 + R * R))


@dataclass(frozen=True)
class OracleRow:
    name: str
    kind: str          # quadrature | energy | residual
    value: float
    target: float
    error: float       # relative or absolute, as documented per row
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tolerance)

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"{self.name:<22s} {self.kind:<10s} value={self.value:<22.15g} target={self.target:<20.15g} "
                f"err={self.error:.3e} tol={self.tolerance:.1e} {status}")


def oracle_rows(grid: GridSpec, window: float = 10.0) -> list[OracleRow]:
    """All soliton checks on ``grid``."""
    nl = make_builtin("pure_power", p=2)
    u = soliton(grid)
    n = norms(u)
    rep = energy(u, nl)
    coarse = grid.spacing > RESOLVED_SPACING
    qtol = LOOSE_TOLERANCE if coarse else 1e-3

    x = grid.x
    mask = np.abs(x) <= window
    exact = soliton_laplacian(x)
    lap_err = float(np.max(np.abs(frac_laplacian(u).values - exact)[mask]) / np.max(np.abs(exact[mask])))

    def rel(v, t):
        return abs(v - t) / abs(t)

    t1 = nehari_scale(u, nl)
    t2 = nehari_scale(2.0 * u, nl)
    cube = n.lp(3) ** 3
    return [
        OracleRow("laplacian_max_relerr", "residual", lap_err, 0.0, lap_err, 1e-4),
        OracleRow("l2_sq", "quadrature", n.l2_sq, 2 * math.pi, rel(n.l2_sq, 2 * math.pi), qtol),
        OracleRow("seminorm_sq", "quadrature", n.seminorm_sq, math.pi, rel(n.seminorm_sq, math.pi), qtol),
        OracleRow("cube_integral", "quadrature", cube, 3 * math.pi, rel(cube, 3 * math.pi), qtol),
        OracleRow("J", "energy", rep.J, math.pi / 2, abs(rep.J - math.pi / 2), 1e-3),
        OracleRow("Phi_over_norm_sq", "residual", rep.Phi / rep.norm_sq, 0.0, abs(rep.Phi / rep.norm_sq), 1e-6),
        OracleRow("nehari_scale_u", "residual", t1, 1.0, abs(t1 - 1.0), 1e-6),
        OracleRow("nehari_scale_2u", "residual", t2, 0.5, abs(t2 - 0.5), 1e-6),
        OracleRow("dual_residual", "residual", rep.dual_residual, 0.0, rep.dual_residual, 1e-3),
    ]
