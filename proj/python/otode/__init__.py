"""Semi-discrete optimal transport by continuation in the regularization parameter."""

from ._otode import (
    Problem,
    QuadratureSpec,
    RK3Tableau,
    builtin_example,
    cell_masses,
    dual_gradient,
    dual_gradient_dt,
    dual_hessian,
    dual_value,
    exact_potential_1d,
    exact_solution,
    initial_potential,
    load_problem,
    make_tableau,
    newton_solve,
    problem_json,
    projected_solve,
    random_problem,
    restricted_eigenvalues,
    save_problem,
    smoothed_cell_masses,
    soft_cell_weights,
    solve_ivp,
)

__all__ = [
    "Problem",
    "QuadratureSpec",
    "RK3Tableau",
    "builtin_example",
    "cell_masses",
    "dual_gradient",
    "dual_gradient_dt",
    "dual_hessian",
    "dual_value",
    "exact_potential_1d",
    "exact_solution",
    "initial_potential",
    "load_problem",
    "make_tableau",
    "newton_solve",
    "problem_json",
    "projected_solve",
    "random_problem",
    "restricted_eigenvalues",
    "save_problem",
    "smoothed_cell_masses",
    "soft_cell_weights",
    "solve_ivp",
]
