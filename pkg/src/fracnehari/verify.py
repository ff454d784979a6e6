"""Splitting experiments for sequences that converge weakly by translation.

A fixed bump ``w`` translated by ``d`` converges weakly to zero as ``d``
grows, so ``u_n = u + w(. - d)`` converges weakly to ``u``.  Integral
functionals of local type then split additively up to an error that
vanishes with the overlap; the quadratic form does not, because the
fractional seminorm couples distant points.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalOverflow
from .functional import nehari_functional
from .grid import Field, GridSpec, norms
from .nonlinearity import Nonlinearity, hfun, log_sample

FUNCTIONALS = ("fu", "F", "H")
SPLIT_COLUMNS = ("d", "functional", "defect", "defect_normalized")


def _density(nl: Nonlinearity, functional: str):
    if functional == "fu":
        return lambda s: s * nl.f(s)
    if functional == "F":
        return nl.F
    if functional == "H":
        return lambda s: hfun(nl, s)
    raise ValueError(f"unknown functional {functional!r}; expected one of {FUNCTIONALS}")


def _shifted(w: Field, d: float) -> Field:
    return w.roll(w.grid.steps(d))


def _evaluate(G, values, nl):
    with np.errstate(over="ignore", invalid="ignore"):
        out = G(values)
    if not np.all(np.isfinite(out)):
        amp = float(np.max(np.abs(values[~np.isfinite(out)])))
        raise NumericalOverflow(f"{nl.describe()} overflows at amplitude |u|={amp:.6g}", amplitude=amp)
    return out


def _check_regime(u_n: Field, rho0):
    if rho0 is not None and math.sqrt(norms(u_n).h_half_sq) > rho0:
        raise ValueError(f"||u_n|| exceeds rho0={rho0:g}; the splitting lemma needs the small-norm regime")


def brezis_lieb_defect(u: Field, w: Field, d: float, nl: Nonlinearity, functional: str = "fu", rho0=None) -> float:
    """``|int G(u_n) - G(w_d) - G(u)|`` with ``u_n = u + w_d``, ``w_d = w(. - d)``.

    ``G`` is ``f(s) s``, ``F`` or ``H``.  The three-term difference is formed
    pointwise before summing, so cancellation between large integrals does
    not swamp the small overlap contribution.  ``d`` must be a whole number
    of grid steps.  Passing ``rho0`` enforces ``||u_n|| <= rho0``.
    """
    if u.grid != w.grid:
        raise ValueError("u and w live on different grids")
    G = _density(nl, functional)
    wd = _shifted(w, d)
    un = u + wd
    _check_regime(un, rho0)
    diff = _evaluate(G, un.values, nl) - _evaluate(G, wd.values, nl) - _evaluate(G, u.values, nl)
    return abs(u.grid.spacing * float(np.sum(diff)))


def splitting_identity_check(u: Field, w: Field, d: float, nl: Nonlinearity, rho0=None) -> float:
    """``|Phi(u_n) - Phi(w_d) - Phi(u)|`` with ``u_n = u + w(. - d)``.

    Includes the nonlocal cross term of the quadratic form, so it does not
    vanish for overlapping tails; see :func:`norm_additivity_defect`.
    """
    if u.grid != w.grid:
        raise ValueError("u and w live on different grids")
    if w.is_zero():
        return 0.0
    wd = _shifted(w, d)
    un = u + wd
    _check_regime(un, rho0)
    return abs(nehari_functional(un, nl) - nehari_functional(wd, nl) - nehari_functional(u, nl))


def norm_additivity_defect(u: Field, w: Field, d: float) -> float:
    """``||u_n||^2 - ||w_d||^2 - ||u||^2 = 2 <u, w_d>_{H^1/2}`` (signed)."""
    wd = _shifted(w, d)
    return norms(u + wd).h_half_sq - norms(wd).h_half_sq - norms(u).h_half_sq


@dataclass
class SplitExperiment:
    """Defects over increasing separations for a fixed pair of bumps."""

    u: Field
    w: Field
    separations: tuple
    nl: Nonlinearity
    defects: dict = field(default_factory=dict)        # functional -> array over d
    normalized: dict = field(default_factory=dict)
    norm_sq: np.ndarray | None = None
    tail_threshold: float = 1e-8

    def __post_init__(self):
        seps = tuple(float(d) for d in self.separations)
        if len(seps) < 1 or any(b <= a for a, b in zip(seps, seps[1:])):
            raise ValueError("separations must be strictly increasing")
        for d in seps:
            self.u.grid.steps(d)
        self.separations = seps

    def run(self) -> "SplitExperiment":
        self.norm_sq = np.array([norms(self.u + _shifted(self.w, d)).h_half_sq for d in self.separations])
        for fn in FUNCTIONALS:
            vals = np.array([brezis_lieb_defect(self.u, self.w, d, self.nl, fn) for d in self.separations])
            self.defects[fn] = vals
            self.normalized[fn] = vals / self.norm_sq
        return self

    def disjoint_at_largest(self) -> bool:
        """Whether ``u`` and the farthest ``w_d`` are each below the tail
        threshold wherever the other is not."""
        wd = _shifted(self.w, self.separations[-1])
        a, b = np.abs(self.u.values), np.abs(wd.values)
        return bool(np.all(np.minimum(a, b) < self.tail_threshold))

    def monotone(self, strict=False) -> dict:
        out = {}
        for fn, v in self.normalized.items():
            dv = np.diff(v)
            out[fn] = bool(np.all(dv < 0) if strict else np.all(dv <= 0))
        return out

    def triangle_bound_holds(self) -> bool:
        """H-defect <= fu-defect + 2 F-defect at every separation."""
        d = self.defects
        return bool(np.all(d["H"] <= d["fu"] + 2.0 * d["F"] + 1e-15 * self.norm_sq))

    def rows(self):
        for i, d in enumerate(self.separations):
            for fn in FUNCTIONALS:
                yield d, fn, float(self.defects[fn][i]), float(self.normalized[fn][i])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SPLIT_COLUMNS)
            for d, fn, a, b in self.rows():
                w.writerow([f"{d:.17g}", fn, f"{a:.17g}", f"{b:.17g}"])


def default_bump_pair(grid: GridSpec) -> tuple[Field, Field]:
    """Two unit Gaussians ``exp(-x^2)`` centered at the origin."""
    b = grid.field(lambda x: np.exp(-(x**2)))
    return b, b


def wave_packet(grid: GridSpec, k: float = 6.0, width: float = 1.0) -> Field:
    """``cos(k x) exp(-x^2 / (2 width^2))``.

    Its spectrum at xi = 0 is of size ``exp(-k^2 width^2 / 2)``, so the
    nonlocal cross term with a distant copy (which is driven by the kink of
    ``|xi|`` at the origin) is negligible, unlike for a positive bump.
    """
    return grid.field(lambda x: np.cos(k * x) * np.exp(-0.5 * (x / width) ** 2))


# ---------------------------------------------------------------------------
# growth envelopes


@dataclass(frozen=True)
class EnvelopeReport:
    alpha: float
    q: float
    D: float | None
    minimal_D: dict           # envelope name -> smallest D that works on the sample
    holds: dict               # envelope name -> bool (only if D was given)
    witnesses: dict           # envelope name -> s where the minimal D is attained

    @property
    def passed(self) -> bool:
        return all(self.holds.values()) if self.D is not None else True

    def lines(self):
        yield f"alpha={self.alpha:g} q={self.q:g} D={'auto' if self.D is None else f'{self.D:g}'}"
        for name, m in self.minimal_D.items():
            status = "" if self.D is None else (" pass" if self.holds[name] else " FAIL")
            yield f"{name}: minimal_D={m:.6g} at s={self.witnesses[name]:.6g}{status}"


def growth_envelope_check(nl: Nonlinearity, alpha: float, D: float | None = None, q: float = 4.0, sample=None) -> EnvelopeReport:
    """Check the four growth envelopes

        F(s), f(s)s   <= (s^2 + exp(alpha s^2) - 1) + D |s|^q
        |f(s)|, |f'(s)s| <= (|s| + exp(alpha s^2) - 1) + D |s|^(q-1)

    on a sample, reporting the smallest D for which each holds there.
    Requires ``alpha`` above the critical exponent of ``nl`` (if any).
    At ``s = 0`` both sides vanish, so zero is dropped from the sample.
    """
    if nl.alpha0 is not None and not alpha > nl.alpha0:
        raise ValueError(f"alpha={alpha:g} must exceed alpha0={nl.alpha0:g}")
    if not q > 2:
        raise ValueError("need q > 2")
    s = log_sample() if sample is None else np.asarray(sample, dtype=float)
    s = np.unique(np.abs(s[s != 0]))
    with np.errstate(over="ignore"):
        e = np.expm1(alpha * s * s)
    quad = s * s + e
    lin = s + e
    lhs = {
        "F": (nl.F(s), quad, s**q),
        "G": (s * nl.f(s), quad, s**q),
        "|f|": (np.abs(nl.f(s)), lin, s ** (q - 1)),
        "|f's|": (np.abs(nl.fprime(s) * s), lin, s ** (q - 1)),
    }
    minimal, holds, wit = {}, {}, {}
    for name, (val, base, powr) in lhs.items():
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            need = (val - base) / powr
        # base overflowed, or both sides underflowed: the envelope holds there
        need = np.where(np.isfinite(need), need, -np.inf)
        i = int(np.argmax(need))
        minimal[name] = max(0.0, float(need[i]))
        wit[name] = float(s[i])
        if D is not None:
            holds[name] = bool(minimal[name] <= D * (1.0 + 1e-12))
    return EnvelopeReport(alpha, q, D, minimal, holds, wit)
