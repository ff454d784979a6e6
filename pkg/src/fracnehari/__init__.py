"""Ground states of (-Delta)^(1/2) u + u = f(u) on the real line.

Spectral discretization of the half Laplacian, Nehari-manifold descent,
hypothesis audits for the nonlinearity, exponential-integrability probes
and splitting experiments.
"""

from .errors import NonFiniteFieldError, NumericalOverflow, ProjectionFailure
from .functional import (
    EnergyReport,
    energy,
    ground_energy_upper_bound,
    nehari_functional,
    nehari_scale,
    norm_sq_upper_bound,
    project,
    sobolev_gradient,
    sq_estimate,
)
from .grid import Field, GridSpec, frac_laplacian, gagliardo_seminorm_sq, norms
from .moser import lambda_bound_check, moser_integral, probe_H
from .nonlinearity import Nonlinearity, audit, classify_growth, make_builtin
from .solver import SolveConfig, SolveTrace, recenter, solve, vanishing_monitor
from .verify import SplitExperiment, brezis_lieb_defect, growth_envelope_check, splitting_identity_check

__all__ = [
    "EnergyReport", "Field", "GridSpec", "NonFiniteFieldError", "Nonlinearity", "NumericalOverflow",
    "ProjectionFailure", "SolveConfig", "SolveTrace", "SplitExperiment", "audit", "brezis_lieb_defect",
    "classify_growth", "energy", "frac_laplacian", "gagliardo_seminorm_sq", "ground_energy_upper_bound",
    "growth_envelope_check", "lambda_bound_check", "make_builtin", "moser_integral", "nehari_functional",
    "nehari_scale", "norm_sq_upper_bound", "norms", "probe_H", "project", "recenter", "sobolev_gradient",
    "solve", "splitting_identity_check", "sq_estimate", "vanishing_monitor",
]
