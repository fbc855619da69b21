"""
Closed-form quantities of the discretised problem: objective, remainder,
penalty functional, their gradients, the exact constrained solution and
the penalty solutions.
"""
import logging

import numpy as np

from pan.exceptions import ContractViolationError, SingularSystemError
from pan.linear.problem import (
    SINGULARITY_TOLERANCE,
    LinearControlProblem,
    PapPoint,
    relative_smallest_singular_value
)

log = logging.getLogger(__name__)


def _check_lambda(lam: float):
    if not lam > 0:
        raise ContractViolationError(f'penalty weight must be positive, got {lam}')


def _solve(problem: LinearControlProblem, alpha: float) -> np.ndarray:
    gram = problem.gram(alpha)
    ratio = relative_smallest_singular_value(gram)
    if ratio < SINGULARITY_TOLERANCE:
        raise SingularSystemError(f'G_alpha is singular for alpha={alpha}', ratio)
    return np.linalg.solve(gram, problem.Atb)


def evaluate_objective(problem: LinearControlProblem, point: PapPoint) -> float:
    """
    ``J(u, y) = ½‖Au − b‖² + (ρ/2)‖y‖²``.
    """
    point.check(problem)
    misfit = problem.A @ point.u - problem.b
    return float(0.5 * misfit @ misfit + 0.5 * problem.rho * point.y @ point.y)


def evaluate_remainder(problem: LinearControlProblem, point: PapPoint) -> float:
    """
    ``R(u, y) = ‖Ku − y‖²``, zero exactly on the constraint.
    """
    point.check(problem)
    violation = problem.K @ point.u - point.y
    return float(violation @ violation)


def evaluate_penalty(problem: LinearControlProblem, point: PapPoint, lam: float) -> float:
    """
    ``P^λ(u, y) = J(u, y) + (λ/2)R(u, y)``.
    """
    _check_lambda(lam)
    return evaluate_objective(problem, point) + 0.5 * lam * evaluate_remainder(problem, point)


def objective_gradient(problem: LinearControlProblem, point: PapPoint) -> np.ndarray:
    """
    ``∇J = (Aᵀ(Au − b), ρy)`` stacked as one vector.
    """
    point.check(problem)
    return np.concatenate([problem.AtA @ point.u - problem.Atb, problem.rho * point.y])


def remainder_gradient(problem: LinearControlProblem, point: PapPoint) -> np.ndarray:
    """
    ``∇R = (2Kᵀ(Ku − y), −2(Ku − y))`` stacked as one vector.
    """
    point.check(problem)
    violation = problem.K @ point.u - point.y
    return np.concatenate([2.0 * problem.K.T @ violation, -2.0 * violation])


def penalty_gradient(problem: LinearControlProblem, point: PapPoint, lam: float) -> np.ndarray:
    _check_lambda(lam)
    return objective_gradient(problem, point) + 0.5 * lam * remainder_gradient(problem, point)


def exact_solution(problem: LinearControlProblem) -> PapPoint:
    """
    The constrained minimiser ``û = (AᵀA + ρKᵀK)⁻¹Aᵀb``, ``ŷ = Kû``.

    Example:

    ::

        point = exact_solution(toy_problem())
        # PapPoint(u=[0.4], y=[0.8])

    :param problem: The problem.
    :return: The exact solution.
    """
    u = _solve(problem, problem.rho)
    return PapPoint(u, problem.K @ u)


def penalty_solution(problem: LinearControlProblem, lam: float) -> PapPoint:
    """
    The unique minimiser of ``P^λ``:
    ``u^λ = (AᵀA + ρλ/(ρ+λ) KᵀK)⁻¹Aᵀb``, ``y^λ = λ/(ρ+λ) Ku^λ``.

    :param problem: The problem.
    :param lam: Penalty weight, positive.
    :return: The penalty solution.
    """
    _check_lambda(lam)
    u = _solve(problem, problem.rho * lam / (problem.rho + lam))
    return PapPoint(u, lam / (problem.rho + lam) * (problem.K @ u))


def penalty_hessian(problem: LinearControlProblem, lam: float) -> np.ndarray:
    """
    The constant Hessian of ``P^λ``::

        [[AᵀA + λKᵀK, −λKᵀ      ],
         [−λK,         (ρ+λ)I_m ]]

    It is symmetric positive definite for every ``λ > 0`` but its
    condition number grows with ``λ``.
    """
    _check_lambda(lam)
    top = np.hstack([problem.gram(lam), -lam * problem.K.T])
    bottom = np.hstack([-lam * problem.K, (problem.rho + lam) * np.eye(problem.m)])
    return np.vstack([top, bottom])


def condition_number(problem: LinearControlProblem, lam: float) -> float:
    """
    Spectral condition number of :py:func:`penalty_hessian`.
    """
    eigenvalues = np.linalg.eigvalsh(penalty_hessian(problem, lam))
    return float(eigenvalues[-1] / eigenvalues[0])


def anchor(problem: LinearControlProblem, lambda2: float) -> tuple:
    """
    The small-penalty anchor ``(u^{λ2}, y^{λ2})`` together with its objective and remainder.

    Any other point in the closure of Ω1 may serve as anchor; this is the default choice.

    :param problem: The problem.
    :param lambda2: Small penalty weight.
    :return: ``(point, objective, remainder)``.
    """
    point = penalty_solution(problem, lambda2)
    return point, evaluate_objective(problem, point), evaluate_remainder(problem, point)
