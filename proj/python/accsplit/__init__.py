"""Accelerated operator splitting solvers and experiment harness."""

from ._core import (
    ConfigurationError,
    DampingSchedule,
    LassoInstance,
    NumericalError,
    ParameterError,
    ShapeError,
    gamma,
    gen_lasso,
    lasso_suite,
    matcomp_suite,
    order_check,
    project_box,
    prox_l1,
    prox_least_squares,
    prox_nuclear,
    rate_checks,
    resolvent_of_yosida_l1,
    run_cli,
    solve_lasso,
)

__all__ = [
    "ConfigurationError",
    "DampingSchedule",
    "LassoInstance",
    "NumericalError",
    "ParameterError",
    "ShapeError",
    "gamma",
    "gen_lasso",
    "lasso_suite",
    "matcomp_suite",
    "order_check",
    "project_box",
    "prox_l1",
    "prox_least_squares",
    "prox_nuclear",
    "rate_checks",
    "resolvent_of_yosida_l1",
    "run_cli",
    "solve_lasso",
]
