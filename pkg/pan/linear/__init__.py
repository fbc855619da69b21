"""
The discretised linear control problem and its penalty adversarial functional.
"""
from pan.linear.adversarial import (
    OmegaBound,
    TheoremCondition,
    admissible_objective_band,
    equivalent_lambda,
    evaluate_pap,
    omega_upper_bound,
    pap_gradient,
    theorem_condition
)
from pan.linear.descent import DescentOptions, DescentResult, minimize_pap, minimize_penalty
from pan.linear.grid import contour_grid, grid_minimize, objective_field, pap_field, penalty_field
from pan.linear.problem import LinearControlProblem, PapConfig, PapEvaluation, PapPoint, Region, toy_problem
from pan.linear.solution import (
    anchor,
    condition_number,
    evaluate_objective,
    evaluate_penalty,
    evaluate_remainder,
    exact_solution,
    objective_gradient,
    penalty_gradient,
    penalty_hessian,
    penalty_solution,
    remainder_gradient
)
