"""Energy J, Nehari functional, Sobolev gradient and closed-form bounds.

With ``||u||^2 = ||u||_2^2 + ||(-Delta)^(1/4) u||_2^2``::

    J(u)   = ||u||^2 / 2 - int F(u)
    Phi(u) = J'(u)u = ||u||^2 - int f(u) u
    int H(u) = 2 J(u) - Phi(u)

The Nehari manifold is ``{u != 0 : Phi(u) = 0}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalOverflow, ProjectionFailure
from .grid import Field, GridSpec, h_half_inner, norms, riesz_map
from .nonlinearity import Nonlinearity


def _nonlinear_values(u: Field, nl: Nonlinearity, need_F=True):
    v = u.values
    with np.errstate(over="ignore", invalid="ignore"):
        fv = nl.f(v)
        Fv = nl.F(v) if need_F else None
    bad = ~np.isfinite(fv)
    if need_F:
        bad |= ~np.isfinite(Fv)
    if np.any(bad):
        amp = float(np.max(np.abs(v[bad])))
        raise NumericalOverflow(
            f"{nl.describe()} overflows at amplitude |u|={amp:.6g}; the exponential "
            "integral is no longer representable in double precision",
            amplitude=amp,
        )
    return fv, Fv


@dataclass(frozen=True)
class EnergyReport:
    l2_sq: float
    seminorm_sq: float
    norm_sq: float
    F_integral: float
    fu_integral: float
    J: float
    Phi: float
    H_integral: float
    dual_residual: float

    FIELDS = ("l2_sq", "seminorm_sq", "norm_sq", "F_integral", "fu_integral", "J", "Phi", "H_integral", "dual_residual")

    def to_text(self) -> str:
        return "".join(f"{k}={v:.17g}\n" for k, v in asdict(self).items())

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(cls.FIELDS)

    def csv_row(self) -> str:
        return ",".join(f"{getattr(self, k):.17g}" for k in self.FIELDS)


def nehari_functional(u: Field, nl: Nonlinearity) -> float:
    """``Phi(u) = ||u||^2 - int f(u) u``."""
    fv, _ = _nonlinear_values(u, nl, need_F=False)
    n = norms(u)
    return n.h_half_sq - u.grid.spacing * float(np.dot(fv, u.values))


def sobolev_gradient(u: Field, nl: Nonlinearity) -> Field:
    """Riesz representative g of J'(u): ``<g, v>_{H^1/2} = J'(u) v``.

    On the torus ``g_hat = u_hat - f(u)_hat / (1 + |xi|)``.
    """
    fv, _ = _nonlinear_values(u, nl, need_F=False)
    return u - riesz_map(Field(u.grid, fv))


def energy(u: Field, nl: Nonlinearity, with_gradient=True) -> EnergyReport:
    fv, Fv = _nonlinear_values(u, nl)
    h = u.grid.spacing
    n = norms(u)
    F_int = h * float(np.sum(Fv))
    fu_int = h * float(np.dot(fv, u.values))
    J = 0.5 * n.h_half_sq - F_int
    Phi = n.h_half_sq - fu_int
    H_int = fu_int - 2.0 * F_int
    res = dual_norm(sobolev_gradient(u, nl)) if with_gradient else float("nan")
    return EnergyReport(n.l2_sq, n.seminorm_sq, n.h_half_sq, F_int, fu_int, J, Phi, H_int, res)


def dual_norm(g: Field) -> float:
    return math.sqrt(max(0.0, h_half_inner(g, g)))


def J_value(u: Field, nl: Nonlinearity) -> float:
    return energy(u, nl, with_gradient=False).J


def nehari_scale(u: Field, nl: Nonlinearity, rtol=1e-14, factor=2.0, max_doublings=60) -> float:
    """Unique ``t0 > 0`` with ``Phi(t0 u) = 0``.

    Solves ``||u||^2 = int f(t u) u / t`` (the right side increases in t for
    admissible f) by geometric bracketing from ``t = 1`` followed by Brent's
    method.  Overflow of ``f(t u)`` counts as the right side exceeding the
    left.  Raises :class:`ProjectionFailure` if no sign change is found in
    ``[1e-8, 1e8]``.
    """
    if u.is_zero():
        raise ProjectionFailure("cannot project the zero field onto the Nehari manifold")
    v = u.values
    h = u.grid.spacing
    nsq = norms(u).h_half_sq

    def g(t):
        with np.errstate(over="ignore", invalid="ignore"):
            val = nsq - h * float(np.dot(nl.f(t * v), v)) / t
        return val if np.isfinite(val) else -np.inf

    g1 = g(1.0)
    if g1 == 0.0:
        return 1.0
    lo = hi = 1.0
    for _ in range(max_doublings):
        if g1 > 0:
            lo, hi = hi, hi * factor
            if hi > 1e8:
                break
            if g(hi) <= 0:
                break
        else:
            lo, hi = lo / factor, lo
            if lo < 1e-8:
                break
            if g(lo) >= 0:
                break
    if not (1e-8 <= lo and hi <= 1e8 and g(lo) >= 0 >= g(hi)):
        raise ProjectionFailure(
            f"no sign change of Phi(t u) for t in [1e-8, 1e8] with {nl.describe()}; "
            "the growth hypotheses fail or u is numerically degenerate"
        )
    # shrink an infinite upper value to a finite one for Brent
    while not np.isfinite(g(hi)) and hi / lo > 1 + 1e-15:
        mid = math.sqrt(lo * hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return brentq(g, lo, hi, xtol=1e-300, rtol=rtol, maxiter=200)


def project(u: Field, nl: Nonlinearity) -> tuple[Field, float]:
    t0 = nehari_scale(u, nl)
    return t0 * u, t0


def ray_energies(u: Field, nl: Nonlinearity, ts) -> np.ndarray:
    """``J(t u)`` for each t (used to confirm the ray maximum at t0)."""
    return np.array([J_value(float(t) * u, nl) for t in ts])


# ---------------------------------------------------------------------------
# closed-form bounds


def ground_energy_upper_bound(q, C_q, S_q_estimate) -> float:
    """``(1/2 - 1/q) S^(2q/(q-2)) / (q C_q)^(2/(q-2))``, an upper bound for m."""
    if not (q > 2 and C_q > 0 and S_q_estimate > 0):
        raise ValueError("need q > 2, C_q > 0, S > 0")
    return (0.5 - 1.0 / q) * S_q_estimate ** (2 * q / (q - 2)) / (q * C_q) ** (2 / (q - 2))


def norm_sq_upper_bound(q, C_q, theta, S_q_estimate) -> float:
    """Cap on ``limsup ||u_n||^2`` for minimizing sequences on the Nehari set."""
    if not theta > 2:
        raise ValueError("need theta > 2")
    if not (q > 2 and C_q > 0 and S_q_estimate > 0):
        raise ValueError("need q > 2, C_q > 0, S > 0")
    return (
        theta / (theta - 2) * (q - 2) / q
        * S_q_estimate ** (2 * q / (q - 2)) / (q * C_q) ** (2 / (q - 2))
    )


def sq_quotient(v: Field, q: float) -> float:
    """``||v|| / ||v||_{L^q}``; scale invariant."""
    if v.is_zero():
        raise ValueError("sq_quotient of the zero field")
    if not q > 2:
        raise ValueError("need q > 2")
    n = norms(v)
    return math.sqrt(n.h_half_sq) / n.lp(q)


def gaussian_family(grid: GridSpec, widths=None):
    """Centered Gaussians ``exp(-x^2 / (2 w^2))``; yields ``(w, Field)``."""
    widths = np.geomspace(0.1, 10.0, 41) if widths is None else widths
    for w in widths:
        yield float(w), grid.field(lambda x: np.exp(-0.5 * (x / w) ** 2))


@dataclass(frozen=True)
class SqEstimate:
    value: float
    argmin: str
    family: str


def sq_estimate(grid: GridSpec, q: float, widths=None, extra: Field | None = None) -> SqEstimate:
    """Minimum of :func:`sq_quotient` over a Gaussian-width family (and ``extra``).

    Any member bounds the true infimum from above, so bounds built from this
    value are valid, if not sharp.
    """
    best = (math.inf, "")
    for w, v in gaussian_family(grid, widths):
        s = sq_quotient(v, q)
        if s < best[0]:
            best = (s, f"gaussian(width={w:.6g})")
    if extra is not None:
        s = sq_quotient(extra, q)
        if s < best[0]:
            best = (s, "supplied field")
    return SqEstimate(best[0], best[1], "centered gaussians exp(-x^2/(2w^2)), w in [0.1, 10]")
