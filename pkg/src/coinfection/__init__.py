"""Two-timescale coinfection model: aggregation, equilibria and outcome maps."""

from .dynamics import (
    State2,
    State3,
    change_of_variables,
    inverse_change_of_variables,
    rhs_complete,
    rhs_fast,
    rhs_primary,
    rhs_rescaled,
    simulate_complete,
    simulate_reduced,
)
from .equilibria import Label, Scenario, classify, interior_equilibria, jacobian, nullcline_phi, nullcline_psi
from .integrator import Trajectory, integrate
from .params import FullParams, ReducedParams, Thresholds, compute_nu_star, compute_thresholds, load_params, reduce
from .sweep import SweepSpec, run_sweep, validate_aggregation

__all__ = [
    "FullParams", "ReducedParams", "Thresholds", "compute_nu_star", "reduce", "compute_thresholds",
    "load_params", "State2", "State3", "rhs_primary", "rhs_rescaled", "rhs_fast", "rhs_complete",
    "change_of_variables", "inverse_change_of_variables", "simulate_reduced", "simulate_complete",
    "Trajectory", "integrate", "Label", "Scenario", "classify", "interior_equilibria", "jacobian",
    "nullcline_phi", "nullcline_psi", "SweepSpec", "run_sweep", "validate_aggregation",
]
