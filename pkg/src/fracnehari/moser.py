"""Numerical probes of the exponential integrability bound

    int (exp(alpha u^2) - 1) dx <= H_alpha ||u||_2^2   when ||(-Delta)^(1/4) u||_2^2 <= 1.

The sharp threshold and the constants H_alpha are not known in closed form,
so everything here is a one-sided estimate: any trial in the unit seminorm
ball gives a lower bound for H_alpha.  Nothing asserts a threshold value.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalOverflow
from .grid import Field, GridSpec, norms

TRIAL_FAMILIES = ("gaussian", "bump", "log")
PROBE_COLUMNS = ("trial_id", "alpha", "seminorm_sq", "l2_sq", "integral", "ratio")
_EXP_LIMIT = math.log(np.finfo(float).max)


def moser_integral(u: Field, alpha: float) -> float:
    """Rectangle rule for ``int (exp(alpha u^2) - 1)``, via expm1.

    Raises :class:`NumericalOverflow` (with the offending amplitude) when
    ``alpha u^2`` exceeds the double-precision exponent range.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    arg = alpha * u.values**2
    if np.any(arg > _EXP_LIMIT):
        amp = float(np.max(np.abs(u.values[arg > _EXP_LIMIT])))
        raise NumericalOverflow(
            f"exp(alpha u^2) overflows for alpha={alpha:g} at amplitude |u|={amp:.6g}", amplitude=amp
        )
    return u.grid.spacing * float(np.sum(np.expm1(arg)))


# ---------------------------------------------------------------------------
# trial families


def gaussian_profile(grid: GridSpec, width: float) -> Field:
    return grid.field(lambda x: np.exp(-0.5 * (x / width) ** 2))


def bump_profile(grid: GridSpec, width: float) -> Field:
    """``exp(1 - 1 / (1 - (x/w)^2))`` on ``|x| < w``; peak 1."""

    def fn(x):
        r = np.minimum(np.abs(x) / width, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            v = np.exp(1.0 - 1.0 / (1.0 - r * r))
        return np.where(r < 1.0, v, 0.0)

    return grid.field(fn)


def log_profile(grid: GridSpec, eps: float) -> Field:
    """Truncated logarithm ``min(log(1/eps), log(1/|x|))_+``, supported on ``|x| < 1``.

    Smaller ``eps`` concentrates more; normalized to unit seminorm its peak
    grows like ``sqrt(log(1/eps))`` while its L^2 mass shrinks.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")

    def fn(x):
        ax = np.maximum(np.abs(x), eps)
        return np.maximum(np.log(1.0 / ax), 0.0)

    return grid.field(fn)


def family_trials(name: str, grid: GridSpec, budget: int, small_amplitude=1e-3):
    """Yield ``(label, Field)`` trial shapes for a named family.

    The first trial is a small-amplitude copy of a mid-range member, so every
    probe carries its own Taylor-regime check.  Log profiles are ordered by
    increasing concentration, stopping where ``eps`` would fall below
    four grid steps.
    """
    if budget < 2:
        raise ValueError("budget must be >= 2")
    n = budget - 1
    if name == "gaussian":
        params = np.geomspace(0.1, 10.0, n)
        make, key = gaussian_profile, "width"
    elif name == "bump":
        params = np.geomspace(0.2, 20.0, n)
        make, key = bump_profile, "width"
    elif name == "log":
        params = np.geomspace(0.5, max(4 * grid.spacing, 1e-12), n)
        make, key = log_profile, "eps"
    else:
        raise ValueError(f"unknown trial family {name!r}; expected one of {TRIAL_FAMILIES}")
    mid = params[n // 2]
    yield f"{name}({key}={mid:.6g}) x {small_amplitude:g}", small_amplitude * make(grid, mid)
    for p in params:
        yield f"{name}({key}={p:.6g})", make(grid, p)


def normalize_seminorm(u: Field) -> Field:
    """Scale down so ``seminorm_sq = min(1, seminorm_sq)``."""
    s = norms(u).seminorm_sq
    return u / math.sqrt(s) if s > 1.0 else u


# ---------------------------------------------------------------------------
# probes


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    label: str
    alpha: float
    seminorm_sq: float
    l2_sq: float
    integral: float
    ratio: float


@dataclass
class MoserProbe:
    alpha: float
    family: str
    records: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def H_hat(self) -> float:
        """Empirical sup of the ratio: a lower estimate of H_alpha."""
        return max((r.ratio for r in self.records), default=float("nan"))

    @property
    def small_amplitude_ratio(self) -> float:
        return self.records[0].ratio if self.records and self.records[0].trial_id == 0 else float("nan")

    def concentration_trend(self, window=4, rel=0.01) -> str:
        """``grows`` if the ratio still rises by more than ``rel`` per trial over
        the last ``window`` trials, else ``saturates``."""
        r = np.array([rec.ratio for rec in self.records if rec.trial_id > 0])
        if len(r) < window + 1:
            return "insufficient"
        tail = r[-(window + 1):]
        steps = tail[1:] / tail[:-1] - 1.0
        return "grows" if np.all(steps > rel) else "saturates"

    def write_csv(self, path):
        write_probes_csv(path, [self])

    def summary_lines(self):
        yield f"alpha={self.alpha:.17g}"
        yield f"family={self.family}"
        yield f"trials={len(self.records)}"
        yield f"skipped={len(self.skipped)}"
        yield f"H_hat={self.H_hat:.17g}"
        yield f"small_amplitude_ratio={self.small_amplitude_ratio:.17g}"
        yield f"trend={self.concentration_trend()}"


def write_probes_csv(path, probes):
    """One CSV for several probes; rows ordered by probe, then trial id."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROBE_COLUMNS)
        for p in probes:
            for r in p.records:
                w.writerow([r.trial_id] + [f"{getattr(r, c):.17g}" for c in PROBE_COLUMNS[1:]])


def probe_H(alpha: float, family: str, budget: int, grid: GridSpec, small_amplitude=1e-3) -> MoserProbe:
    """Sup of ``int (exp(alpha u^2) - 1) / ||u||_2^2`` over a trial family.

    Each trial is scaled into the unit seminorm ball first.  Trials that
    overflow are skipped and listed in ``probe.skipped``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    probe = MoserProbe(alpha, family)
    for i, (label, shape) in enumerate(family_trials(family, grid, budget, small_amplitude)):
        u = normalize_seminorm(shape)
        n = norms(u)
        try:
            integral = moser_integral(u, alpha)
        except NumericalOverflow as exc:
            probe.skipped.append((i, label, exc.amplitude))
            continue
        probe.records.append(TrialRecord(i, label, alpha, n.seminorm_sq, n.l2_sq, integral, integral / n.l2_sq))
    return probe


@dataclass(frozen=True)
class ConcentrationScan:
    alphas: tuple
    eps: np.ndarray
    ratios: np.ndarray          # shape (len(alphas), len(eps)); nan where skipped
    growth_rates: np.ndarray    # d log(ratio) / d log(1/eps) over the last half

    def lines(self):
        for a, rate, row in zip(self.alphas, self.growth_rates, self.ratios):
            yield f"alpha={a:g} final_ratio={row[-1]:.6g} growth_rate={rate:.4g}"


def concentration_scan(grid: GridSpec, alphas, eps) -> ConcentrationScan:
    """Ratios for unit-seminorm log profiles at decreasing ``eps``.

    The growth rate is the least-squares slope of ``log(ratio)`` against
    ``log(1/eps)`` over the more concentrated half of the scan: near zero
    when the ratio saturates, positive while it keeps growing.
    """
    eps = np.asarray(eps, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise ValueError("eps must be strictly decreasing")
    if eps[-1] < grid.spacing:
        raise ValueError("eps below the grid spacing cannot be resolved")
    shapes = [normalize_seminorm(log_profile(grid, e)) for e in eps]
    ratios = np.full((len(alphas), len(eps)), np.nan)
    for j, u in enumerate(shapes):
        l2 = norms(u).l2_sq
        for i, a in enumerate(alphas):
            try:
                ratios[i, j] = moser_integral(u, a) / l2
            except NumericalOverflow:
                pass
    half = len(eps) // 2
    t = np.log(1.0 / eps[half:])
    rates = np.array([
        np.polyfit(t, np.log(row[half:]), 1)[0] if np.all(np.isfinite(row[half:])) else np.nan
        for row in ratios
    ])
    return ConcentrationScan(tuple(float(a) for a in alphas), eps, ratios, rates)


@dataclass(frozen=True)
class LambdaBoundReport:
    applicable: bool
    norm: float
    rho0: float
    alpha: float
    lhs: float = float("nan")
    rhs: float = float("nan")

    @property
    def holds(self) -> bool:
        return self.applicable and self.lhs <= self.rhs * (1.0 + 1e-12)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def lambda_bound_check(u: Field, alpha: float, rho0: float) -> LambdaBoundReport:
    """Compare ``int (exp(alpha u^2) - 1)`` with the same integral for
    ``rho0 u / ||u||`` (the normalized field pushed out to radius rho0).

    Pointwise monotonicity in amplitude makes the first no larger than the
    second whenever ``||u|| <= rho0``; otherwise the check is not applicable.
    """
    if not (alpha > 0 and rho0 > 0):
        raise ValueError("alpha and rho0 must be positive")
    if u.is_zero():
        return LambdaBoundReport(True, 0.0, rho0, alpha, 0.0, 0.0)
    nrm = math.sqrt(norms(u).h_half_sq)
    if nrm > rho0:
        return LambdaBoundReport(False, nrm, rho0, alpha)
    return LambdaBoundReport(True, nrm, rho0, alpha, moser_integral(u, alpha), moser_integral((rho0 / nrm) * u, alpha))
