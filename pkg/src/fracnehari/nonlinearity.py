"""Nonlinearities f, their primitives F and derivatives f', plus audits.

Built-in families::

    pure_power(p)               f = |s|^(p-1) s
    paper_critical(lam, q, a0)  f = lam s|s|^(q-2) + |s|^(q-2) s exp(a0 s^2)
    exp_power(a0, nu)           f = s^3 exp(a0 |s|^nu)

All are odd, so F is even and only |s| is ever integrated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicHermiteSpline

FAMILIES = ("pure_power", "paper_critical", "exp_power")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Evaluatable triple (f, F, f') with its parameters and growth class.

    ``growth`` is ``"subcritical"`` or ``"critical"``; for the latter
    ``alpha0`` holds the exponent.  ``log_f`` and ``log_dfs`` (log of
    ``f(s)`` and ``f'(s) s`` for large positive ``s``) are optional and let the
    growth classifier avoid overflow.
    """

    name: str
    f: Callable
    F: Callable
    fprime: Callable
    params: dict = field(default_factory=dict)
    growth: str = "subcritical"
    alpha0: float | None = None
    log_f: Callable | None = None
    log_dfs: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def describe(self) -> str:
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({args})"


def hfun(nl: Nonlinearity, s):
    """``H(s) = s f(s) - 2 F(s)``."""
    s = np.asarray(s, dtype=float)
    return s * nl.f(s) - 2.0 * nl.F(s)


# ---------------------------------------------------------------------------
# primitive by tabulated quadrature


class PrimitiveTable:
    """Even primitive ``F(s) = int_0^|s| f`` from a cached quadrature table.

    Nodes are spaced by ``spacing_factor * f/f'`` (geometric near 0, denser
    where f grows exponentially); each cell is integrated by 12-point
    Gauss-Legendre, which is exact to round-off on cells this small, and
    ``F`` is interpolated by cubic Hermite splines using the exact ``f`` as
    slope.  Below the first node, and above ``s_max``, F is integrated
    directly.  Relative accuracy is about 1e-10 or better on the table.
    """

    def __init__(self, f, fprime, s_max=8.0, s_min=1e-3, spacing_factor=0.01):
        self.f = f
        self.s_min = float(s_min)
        self.s_max = float(s_max)
        nodes = [self.s_min]
        s = self.s_min
        while s < self.s_max:
            fs, dfs = float(f(s)), float(fprime(s))
            step = spacing_factor * (fs / dfs if dfs > 0 else s)
            step = min(max(step, 1e-6), 0.05)
            s = min(s + step, self.s_max)
            nodes.append(s)
        nodes = np.array(nodes)
        F0 = self._direct(np.array([self.s_min]))[0]
        a, b = nodes[:-1], nodes[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        cells = half * (f(pts) @ _GL_WEIGHTS)
        values = F0 + np.concatenate([[0.0], np.cumsum(cells)])
        self.nodes = nodes
        self.values = values
        self._spline = CubicHermiteSpline(nodes, values, f(nodes))

    def _direct(self, s):
        # F(s) = s * int_0^1 f(s t) dt
        t = 0.5 * (_GL_NODES + 1.0)
        w = 0.5 * _GL_WEIGHTS
        return s * (self.f(s[:, None] * t[None, :]) @ w)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        out = np.empty_like(a)
        lo = a < self.s_min
        hi = a > self.s_max
        mid = ~(lo | hi)
        if np.any(lo):
            out[lo] = self._direct(a[lo])
        if np.any(mid):
            out[mid] = self._spline(a[mid])
        if np.any(hi):
            top = float(self.values[-1])
            out[hi] = [
                top + integrate.quad(self.f, self.s_max, v, epsrel=1e-12, limit=200)[0] for v in a[hi]
            ]
        return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# built-in families


def _pure_power(p):
    def f(s):
        s = np.asarray(s, dtype=float)
        return np.abs(s) ** (p - 1.0) * s

    def F(s):
        return np.abs(np.asarray(s, dtype=float)) ** (p + 1.0) / (p + 1.0)

    def fprime(s):
        return p * np.abs(np.asarray(s, dtype=float)) ** (p - 1.0)

    return Nonlinearity(
        "pure_power", f, F, fprime, {"p": p}, "subcritical", None,
        log_f=lambda s: p * np.log(s),
        log_dfs=lambda s: np.log(p) + p * np.log(s),
    )


def _paper_critical(lam, q, alpha0):
    def f(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        with np.errstate(over="ignore"):
            return a ** (q - 2.0) * s * (lam + np.exp(alpha0 * s * s))

    def fprime(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        with np.errstate(over="ignore", invalid="ignore"):
            e = np.exp(alpha0 * s * s)
            return a ** (q - 2.0) * (lam * (q - 1.0) + e * ((q - 1.0) + 2.0 * alpha0 * s * s))

    if abs(q - 2 * round(q / 2)) < 1e-12:
        # int_0^s t^(q-1) e^(a t^2) dt = s^q/q * 1F1(q/2; q/2+1; a s^2)
        def F(s):
            a = np.abs(np.asarray(s, dtype=float))
            with np.errstate(over="ignore", invalid="ignore"):
                sq = a**q / q
                return sq * (lam + special.hyp1f1(q / 2.0, q / 2.0 + 1.0, alpha0 * a * a))
    else:
        table = PrimitiveTable(f, fprime)
        F = table

    def log_f(s):
        return (q - 1.0) * np.log(s) + alpha0 * s * s + np.log1p(lam * np.exp(-alpha0 * s * s))

    def log_dfs(s):
        return (q - 1.0) * np.log(s) + alpha0 * s * s + np.log(
            lam * (q - 1.0) * np.exp(-alpha0 * s * s) + (q - 1.0) + 2.0 * alpha0 * s * s
        )

    return Nonlinearity(
        "paper_critical", f, F, fprime, {"lambda": lam, "q": q, "alpha0": alpha0},
        "critical", alpha0, log_f=log_f, log_dfs=log_dfs,
    )


def _exp_power(alpha0, nu):
    def f(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        with np.errstate(over="ignore"):
            return np.copysign(a**3 * np.exp(alpha0 * a**nu), s)

    def fprime(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(alpha0 * a**nu) * (3.0 * s * s + alpha0 * nu * a ** (nu + 2.0))

    growth = "critical" if nu == 2 else "subcritical"
    return Nonlinearity(
        "exp_power", f, PrimitiveTable(f, fprime), fprime, {"alpha0": alpha0, "nu": nu},
        growth, alpha0 if growth == "critical" else None,
        log_f=lambda s: 3.0 * np.log(s) + alpha0 * s**nu,
        log_dfs=lambda s: alpha0 * s**nu + np.log(3.0 * s**4 + alpha0 * nu * s ** (nu + 4.0)),
    )


def make_builtin(family: str, **params) -> Nonlinearity:
    """Construct a built-in nonlinearity, validating its parameters.

    >>> make_builtin("pure_power", p=2).f(0.5)
    0.25
    """
    if family == "pure_power":
        p = float(params.pop("p", 2.0))
        _no_extra(family, params)
        if not p > 1:
            raise ValueError(f"pure_power needs p > 1 so that f(s)/s -> 0 (f1); got p={p}")
        return _pure_power(p)
    if family == "paper_critical":
        lam = float(params.pop("lam", params.pop("lambda", 1.0)))
        q = float(params.pop("q", 4.0))
        alpha0 = float(params.pop("alpha0", np.pi / 4))
        _no_extra(family, params)
        if not q > 2:
            raise ValueError(f"paper_critical needs q > 2 (f3); got q={q}")
        if not alpha0 > 0:
            raise ValueError(f"paper_critical needs alpha0 > 0 (critical growth); got {alpha0}")
        if not lam >= 0:
            raise ValueError(f"paper_critical needs lambda >= 0 (f2 monotonicity); got {lam}")
        return _paper_critical(lam, q, alpha0)
    if family == "exp_power":
        alpha0 = float(params.pop("alpha0", 1.0))
        nu = float(params.pop("nu", 2.0))
        _no_extra(family, params)
        if not alpha0 > 0:
            raise ValueError(f"exp_power needs alpha0 > 0; got {alpha0}")
        if not 0 < nu <= 2:
            raise ValueError(f"exp_power needs 0 < nu <= 2 (beyond critical growth otherwise); got nu={nu}")
        return _exp_power(alpha0, nu)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def _no_extra(family, params):
    if params:
        raise ValueError(f"unexpected parameters for {family}: {sorted(params)}")


# ---------------------------------------------------------------------------
# hypothesis audit


def log_sample(s_min=1e-6, s_max=6.0, n=400) -> np.ndarray:
    """Sign-symmetric log-spaced sample of +-[s_min, s_max]."""
    pos = np.geomspace(s_min, s_max, n)
    return np.concatenate([-pos[::-1], pos])


@dataclass
class HypothesisReport:
    f1_pass: bool
    f2_pass: bool
    f3_pass: bool
    ar_pass: bool
    growth_class: str
    checks: dict
    witness_points: list
    C_q: float
    q: float
    theta: float
    sample_description: str

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def lines(self):
        yield f"sample: {self.sample_description}"
        yield f"growth_class: {self.growth_class}"
        for name, ok in self.checks.items():
            yield f"{name}: {'pass' if ok else 'FAIL'}"
        for s, what, value in self.witness_points[:20]:
            yield f"witness {what}: s={s:.6g} value={value:.6g}"


_REL = 1e-12


def audit(nl: Nonlinearity, sample=None, theta=4.0, C_q=1.0, q=4.0) -> HypothesisReport:
    """Check (f1)-(f3), (AR) and the derived sign properties pointwise.

    Failures are collected with a witness ``(s, check, violated quantity)``;
    nothing is raised.  Equalities such as AR for pure powers are allowed a
    relative slack of 1e-12.
    """
    s = log_sample() if sample is None else np.asarray(sample, dtype=float)
    pos = np.unique(np.abs(s[s != 0]))
    witnesses = []
    checks = {}

    def record(name, ok_mask, pts, vals):
        ok = bool(np.all(ok_mask))
        checks[name] = ok
        if not ok:
            bad = np.flatnonzero(~np.asarray(ok_mask))
            for i in bad[:5]:
                witnesses.append((float(pts[i]), name, float(vals[i])))

    with np.errstate(over="ignore", invalid="ignore"):
        f_pos, f_neg = nl.f(pos), nl.f(-pos)
        F_pos, F_neg = nl.F(pos), nl.F(-pos)
        df_pos = nl.fprime(pos)

    finite = np.isfinite(f_pos) & np.isfinite(F_pos) & np.isfinite(df_pos)
    record("finite", finite, pos, f_pos)
    pos, f_pos, f_neg, F_pos, F_neg, df_pos = (a[finite] for a in (pos, f_pos, f_neg, F_pos, F_neg, df_pos))

    # (f1): odd, convex on R+, f(s)/s -> 0
    odd_err = np.abs(f_pos + f_neg)
    record("f1_odd", odd_err <= _REL * np.abs(f_pos), pos, odd_err)
    ratio = f_pos / pos
    small = pos <= 10 * pos[0]
    record("f1_limit", np.array([ratio[0] < ratio[small][-1] and ratio[0] >= 0]), pos[:1], ratio[:1])
    if len(pos) >= 3:
        a, b = pos[:-2], pos[2:]
        mid = 0.5 * (a + b)
        with np.errstate(over="ignore", invalid="ignore"):
            lhs = nl.f(mid)
            rhs = 0.5 * (nl.f(a) + nl.f(b))
        record("f1_convex", lhs <= rhs * (1 + _REL), mid, lhs - rhs)
    # (f2): f(s)/s increasing
    record("f2_monotone", np.diff(ratio) > 0, pos[1:], np.diff(ratio))
    # (f3): F >= C_q |s|^q
    lower = C_q * pos**q
    record("f3_lower_bound", F_pos >= lower * (1 - _REL), pos, F_pos - lower)
    # (AR): theta F <= s f
    sf = pos * f_pos
    record("ar", theta * F_pos <= sf * (1 + _REL), pos, theta * F_pos - sf)
    # derived properties
    m = pos * pos * df_pos - sf
    record("s2fprime_minus_sf_positive", m > 0, pos, m)
    record("fprime_positive", df_pos > 0, pos, df_pos)
    H_pos = sf - 2.0 * F_pos
    H_neg = -pos * f_neg - 2.0 * F_neg
    record("H_positive", H_pos > 0, pos, H_pos)
    record("H_even", np.abs(H_pos - H_neg) <= _REL * np.abs(H_pos) + 1e-300, pos, H_pos - H_neg)
    record("H_increasing", np.diff(H_pos) > 0, pos[1:], np.diff(H_pos))

    f1 = all(checks[k] for k in ("f1_odd", "f1_limit", "f1_convex") if k in checks)
    return HypothesisReport(
        f1_pass=f1 and checks["finite"],
        f2_pass=checks["f2_monotone"],
        f3_pass=checks["f3_lower_bound"],
        ar_pass=checks["ar"],
        growth_class=nl.growth if nl.alpha0 is None else f"critical({nl.alpha0:g})",
        checks=checks,
        witness_points=witnesses,
        C_q=C_q,
        q=q,
        theta=theta,
        sample_description=f"{len(s)} points, |s| in [{pos.min():.3g}, {pos.max():.3g}], sign-symmetric",
    )


def min_Cq(nl: Nonlinearity, q: float, sample=None) -> float:
    """Largest ``C_q`` with ``F(s) >= C_q |s|^q`` on the (positive) sample."""
    s = log_sample() if sample is None else np.asarray(sample, dtype=float)
    pos = np.unique(np.abs(s[s != 0]))
    return float(np.min(nl.F(pos) / pos**q))


# ---------------------------------------------------------------------------
# growth classification


@dataclass
class GrowthEstimate:
    quantity: str
    alphas: np.ndarray
    trends: list
    alpha0_bracket: tuple
    growth_class: str

    def lines(self):
        for a, t in zip(self.alphas, self.trends):
            yield f"alpha={a:.4g}: {t}"
        yield f"class: {self.growth_class}  bracket: {self.alpha0_bracket}"


def classify_growth(nl: Nonlinearity, alphas=None, s_max=20.0, quantity="f", n_tail=64) -> GrowthEstimate:
    """Trend of ``log f(s) - log(e^(alpha s^2) - 1)`` on ``[s_max/2, s_max]``.

    Monotone decrease is reported as ``decaying`` (ratio heading to 0),
    monotone increase as ``diverging``, anything else as ``indeterminate``.
    ``quantity="dfs"`` classifies ``f'(s) s`` instead.  The bracket is
    (largest diverging alpha, smallest decaying alpha).
    """
    if s_max < 20:
        raise ValueError("s_max must be at least 20")
    alphas = np.round(np.arange(0.1, np.pi + 1e-9, 0.1), 10) if alphas is None else np.asarray(alphas, float)
    s = np.linspace(0.5 * s_max, s_max, n_tail)
    if quantity == "f":
        log_num = nl.log_f(s) if nl.log_f is not None else np.log(nl.f(s))
    elif quantity == "dfs":
        log_num = nl.log_dfs(s) if nl.log_dfs is not None else np.log(nl.fprime(s) * s)
    else:
        raise ValueError("quantity must be 'f' or 'dfs'")

    trends = []
    for a in alphas:
        # log(e^{a s^2} - 1) without overflow
        log_den = a * s * s + np.log(-np.expm1(-a * s * s))
        d = np.diff(log_num - log_den)
        if np.all(d < 0):
            trends.append("decaying")
        elif np.all(d > 0):
            trends.append("diverging")
        else:
            trends.append("indeterminate")

    div = [a for a, t in zip(alphas, trends) if t == "diverging"]
    dec = [a for a, t in zip(alphas, trends) if t == "decaying"]
    lo = float(max(div)) if div else 0.0
    hi = float(min(a for a in dec if a > lo)) if any(a > lo for a in dec) else float("inf")
    if not div and dec:
        cls = "subcritical"
    elif div and dec:
        cls = "critical"
    elif div:
        cls = "beyond_tested_alphas"
    else:
        cls = "indeterminate"
    return GrowthEstimate(quantity, alphas, trends, (lo, hi), cls)
