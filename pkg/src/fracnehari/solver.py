"""Ground states by Sobolev-gradient descent on the Nehari manifold.

Each iteration steps along the negative H^{1/2} gradient, rescales the trial
point back onto the Nehari manifold, and accepts it by an Armijo test on the
projected energy.  Every few iterations the iterate is translated (by whole
grid steps) so that its largest windowed L^2 mass sits at the origin, the
discrete counterpart of ``u_n(x + y_n)`` in the compactness argument.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalOverflow, ProjectionFailure
from .functional import EnergyReport, energy, nehari_functional, nehari_scale, sobolev_gradient
from .grid import Field, GridSpec, h_half_inner, read_field_csv
from .nonlinearity import Nonlinearity

TERMINATIONS = ("converged", "max_iters", "overflow", "projection_failure", "line_search_stalled")
TRACE_COLUMNS = ("iter", "J", "phi", "t0", "residual", "shift", "norm")
_EPS = np.finfo(float).eps


@dataclass
class SolveConfig:
    grid: GridSpec
    nl: Nonlinearity
    init: str = "gaussian"          # gaussian | bump | file | field
    width: float = 1.0
    amplitude: float = 1.0
    init_file: str | None = None
    init_field: Field | None = None
    init_noise: float = 0.0
    step0: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 60
    tol_residual: float = 1e-8
    max_iters: int = 500
    recenter_every: int = 10
    recenter_radius: float = 5.0
    rho0: float = 1.0
    tail_window: int = 20
    seed: int = 0

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.recenter_radius < self.grid.half_width:
            raise ValueError("recenter_radius must lie in (0, L)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if self.init not in ("gaussian", "bump", "file", "field"):
            raise ValueError(f"unknown init {self.init!r}")

    def initial_field(self) -> Field:
        g = self.grid
        if self.init == "gaussian":
            u = g.field(lambda x: self.amplitude * np.exp(-0.5 * (x / self.width) ** 2))
        elif self.init == "bump":
            def bump(x):
                r = np.clip(np.abs(x) / self.width, 0.0, 1.0)
                with np.errstate(divide="ignore", over="ignore"):
                    val = np.exp(1.0 - 1.0 / (1.0 - r * r))
                return self.amplitude * np.where(r < 1.0, val, 0.0)
            u = g.field(bump)
        elif self.init == "file":
            u = read_field_csv(self.init_file, boundary=g.boundary)
            if u.grid != g:
                raise ValueError(f"{self.init_file}: grid {u.grid} does not match {g}")
        else:
            if self.init_field is None or self.init_field.grid != g:
                raise ValueError("init='field' needs init_field on the configured grid")
            u = self.init_field
        if self.init_noise:
            rng = np.random.default_rng(self.seed)
            u = u + self.init_noise * rng.standard_normal(g.n_points) * np.exp(-0.5 * (g.x / self.width) ** 2)
        if u.is_zero():
            raise ValueError("initial field is identically zero")
        return u


@dataclass
class TraceRow:
    iter: int
    J: float
    phi: float
    t0: float
    residual: float
    shift: float
    norm: float
    step: float
    window_mass: float
    phi_projected: float


@dataclass
class SolveTrace:
    rows: list = field(default_factory=list)
    termination: str = ""
    message: str = ""
    radius: float = float("nan")
    dichotomy: dict = field(default_factory=dict)

    def append(self, row: TraceRow):
        self.rows.append(row)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def iterations(self) -> int:
        return self.rows[-1].iter if self.rows else 0

    @property
    def min_norm(self) -> float:
        return float(self.column("norm").min()) if self.rows else float("nan")

    @property
    def max_norm(self) -> float:
        return float(self.column("norm").max()) if self.rows else float("nan")

    def constraint_defect(self) -> float:
        """Largest ``|Phi| / ||u||^2`` over the projected iterates."""
        if not self.rows:
            return float("nan")
        return float(np.max(np.abs(self.column("phi_projected")) / self.column("norm") ** 2))

    def energy_monotone(self, rel_slack=64 * _EPS) -> bool:
        """J never increases between accepted steps beyond round-off."""
        J = self.column("J")
        if len(J) < 2:
            return True
        return bool(np.all(np.diff(J) <= rel_slack * np.maximum(1.0, np.abs(J[:-1]))))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for r in self.rows:
                w.writerow([r.iter] + [f"{getattr(r, c):.17g}" for c in TRACE_COLUMNS[1:]])


def windowed_mass(u: Field, R: float) -> np.ndarray:
    """``int_{y-R}^{y+R} u^2`` for every grid center y (periodic indexing).

    Trapezoid weights: nodes strictly inside the window count fully, nodes at
    exactly distance R count half.
    """
    g = u.grid
    h = g.spacing
    m = int(math.floor(R / h + 1e-9))
    w = np.ones(2 * m + 1)
    if abs(m * h - R) <= 1e-9 * max(1.0, R):
        w[0] = w[-1] = 0.5
    u2 = u.values**2
    ext = np.concatenate([u2[-m:], u2, u2[:m]]) if m else u2
    return h * np.convolve(ext, w, mode="valid")


def recenter(u: Field, R: float) -> tuple[Field, float]:
    """Translate ``u`` so its maximal windowed mass is centered at x = 0.

    Returns the rotated field and the applied shift ``-y*`` (a whole number
    of grid steps).  Ties within 1e-12 relative go to the smallest ``|y*|``.
    """
    g = u.grid
    if not 0 < R < g.half_width:
        raise ValueError("R must lie in (0, L)")
    mass = windowed_mass(u, R)
    top = mass.max()
    cand = np.flatnonzero(mass >= top * (1.0 - 1e-12))
    offsets = cand - g.n_points // 2
    c = int(offsets[np.argmin(np.abs(offsets))])
    return u.roll(-c), -c * g.spacing


@dataclass(frozen=True)
class VanishingReport:
    non_vanishing: bool
    min_mass: float
    final_mass: float
    gamma: float
    radius: float

    @property
    def message(self) -> str:
        if self.non_vanishing:
            return f"non-vanishing: windowed mass >= {self.min_mass:.6g} >= gamma={self.gamma:g} (R={self.radius:g})"
        return f"vanishing warning: windowed mass fell to {self.min_mass:.6g} < gamma={self.gamma:g} (R={self.radius:g})"


def vanishing_monitor(trace: SolveTrace, u: Field, R: float, gamma: float) -> VanishingReport:
    """Whether ``sup_y int_{y-R}^{y+R} u^2`` stays above gamma along the run.

    The trace contributes its recorded masses when it was run with the same
    radius; the supplied field is always included.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    final = float(windowed_mass(u, R).max())
    masses = [final]
    if trace.rows and math.isclose(trace.radius, R):
        masses.extend(trace.column("window_mass"))
    lowest = float(min(masses))
    return VanishingReport(lowest >= gamma, lowest, final, gamma, R)


def _armijo_noise(rep: EnergyReport) -> float:
    return 64 * _EPS * (0.5 * rep.norm_sq + abs(rep.F_integral))


def solve(cfg: SolveConfig):
    """Run the projected descent.

    Returns ``(u, report, trace)``.  Overflow and projection failures end the
    run with the corresponding ``trace.termination``; if that happens before
    any admissible iterate exists, ``report`` is None and ``u`` is the
    initial field.
    """
    nl = cfg.nl
    trace = SolveTrace(radius=cfg.recenter_radius)
    u = cfg.initial_field()

    try:
        phi0 = nehari_functional(u, nl)
        t0 = nehari_scale(u, nl)
        u = t0 * u
        rep = energy(u, nl)
        g = sobolev_gradient(u, nl)
    except NumericalOverflow as exc:
        trace.termination, trace.message = "overflow", str(exc)
        return u, None, trace
    except ProjectionFailure as exc:
        trace.termination, trace.message = "projection_failure", str(exc)
        return u, None, trace

    trace.append(TraceRow(0, rep.J, phi0, t0, rep.dual_residual, 0.0, math.sqrt(rep.norm_sq), 0.0,
                          float(windowed_mass(u, cfg.recenter_radius).max()), rep.Phi))
    tail = []

    k = 0
    while True:
        if rep.dual_residual < cfg.tol_residual:
            trace.termination = "converged"
            break
        if k >= cfg.max_iters:
            trace.termination = "max_iters"
            break
        k += 1
        gsq = h_half_inner(g, g)
        noise = _armijo_noise(rep)
        a = cfg.step0
        accepted = None
        try:
            for _ in range(cfg.max_backtracks):
                v = u - a * g
                if not v.is_zero():
                    phi_v = nehari_functional(v, nl)
                    t = nehari_scale(v, nl)
                    w = t * v
                    rep_w = energy(w, nl, with_gradient=False)
                    if rep_w.J <= rep.J - cfg.armijo * a * gsq + noise:
                        accepted = (w, phi_v, t)
                        break
                a *= cfg.shrink
        except NumericalOverflow as exc:
            trace.termination, trace.message = "overflow", str(exc)
            break
        except ProjectionFailure as exc:
            trace.termination, trace.message = "projection_failure", str(exc)
            break
        if accepted is None:
            trace.termination = "line_search_stalled"
            trace.message = f"no Armijo step after {cfg.max_backtracks} halvings at iteration {k}"
            break

        u, phi_v, t = accepted
        shift = 0.0
        if cfg.recenter_every and k % cfg.recenter_every == 0:
            u, shift = recenter(u, cfg.recenter_radius)
        rep = energy(u, nl)
        g = sobolev_gradient(u, nl)
        trace.append(TraceRow(k, rep.J, phi_v, t, rep.dual_residual, shift, math.sqrt(rep.norm_sq), a,
                              float(windowed_mass(u, cfg.recenter_radius).max()), rep.Phi))
        tail.append(u.values)
        if len(tail) > cfg.tail_window:
            tail.pop(0)

    if tail and trace.termination != "overflow":
        trace.dichotomy = _dichotomy(u, Field(u.grid, np.mean(tail, axis=0)), nl)
    trace.dichotomy["rho0"] = cfg.rho0
    trace.dichotomy["rho0_respected"] = bool(trace.max_norm < cfg.rho0)
    return u, rep, trace


def _dichotomy(u: Field, u_avg: Field, nl: Nonlinearity) -> dict:
    """Sign of Phi on the tail average and the splitting defect
    ``Phi(u) - Phi(u - u_avg) - Phi(u_avg)``."""
    try:
        phi_u = nehari_functional(u, nl)
        phi_avg = nehari_functional(u_avg, nl)
        phi_rest = nehari_functional(u - u_avg, nl)
    except NumericalOverflow:
        return {}
    return {
        "phi_tail_average": phi_avg,
        "phi_tail_average_sign": int(np.sign(phi_avg)),
        "splitting_defect": phi_u - phi_rest - phi_avg,
    }
