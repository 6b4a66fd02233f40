"""Discounted optimal control of finite Markov control processes up to a hitting time."""
from .dp import (
    ValueIterationResult,
    bellman_apply,
    brute_force_optimal,
    discrepancy,
    dssp_value,
    value_iteration,
    vi_policy_sequence,
)
from .model import (
    HorizonPolicy,
    MarkovControlModel,
    StationaryPolicy,
    WeightCertificate,
    make_weight_certificate,
    validate_model,
)
from .modelfile import load_model, save_model
from .policy import concatenate_recovery, evaluate_policy, recovery_bounds, rolling_horizon
from .simulate import SimulationConfig, estimate_recovery_cost, monte_carlo, sample_trajectory

__all__ = [
    "HorizonPolicy", "MarkovControlModel", "SimulationConfig", "StationaryPolicy",
    "ValueIterationResult", "WeightCertificate", "bellman_apply", "brute_force_optimal",
    "concatenate_recovery", "discrepancy", "dssp_value", "estimate_recovery_cost",
    "evaluate_policy", "load_model", "make_weight_certificate", "monte_carlo",
    "recovery_bounds", "rolling_horizon", "sample_trajectory", "save_model",
    "validate_model", "value_iteration", "vi_policy_sequence",
]
