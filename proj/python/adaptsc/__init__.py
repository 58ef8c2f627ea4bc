"""Adaptive sparse-grid stochastic collocation for parametric advection-diffusion."""

from ._core import (
    AdaptiveConfig,
    AdaptiveResult,
    ComplexOdeProblem,
    GlobalErrorMode,
    IntegrationFailure,
    MultiIndexSet,
    ParametricProblem,
    RefinementInit,
    cc_points,
    combination_coefficients,
    dorfler_mark,
    exact_mean,
    exact_solution,
    exact_stddev,
    fem_problem,
    interp_error_study,
    lagrange_norm,
    log_spaced,
    ode_problem,
    rule_size,
    run_adaptive,
    sparse_points,
    timestepping_study,
)

__all__ = [name for name in dir() if not name.startswith("_")]
