"""Scaling-law bounds and compute-optimal frontiers (C++ core)."""

from ._core import (
    DomainError,
    Error,
    EstimationError,
    InfeasibleError,
    bound_at_budget,
    bound_corollary,
    bound_theorem2,
    entropy_bound,
    eval_ground_truth,
    frontier_sweep,
    kl_bernoulli_sigmoid,
    loglog_slope,
    misspec_bound,
    optimal_epsilon,
    optimal_width,
    run_cli,
    sample_ground_truth,
)

__all__ = [
    "DomainError",
    "Error",
    "EstimationError",
    "InfeasibleError",
    "bound_at_budget",
    "bound_corollary",
    "bound_theorem2",
    "entropy_bound",
    "eval_ground_truth",
    "frontier_sweep",
    "kl_bernoulli_sigmoid",
    "loglog_slope",
    "misspec_bound",
    "optimal_epsilon",
    "optimal_width",
    "run_cli",
    "sample_ground_truth",
]
