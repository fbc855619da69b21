"""
Brute-force grid evaluation of scalar fields over ``R²``, used as an
independent oracle and to produce contour data for ``n = m = 1`` problems.
"""
import typing

import numpy as np
import pandas as pd

from pan.exceptions import ContractViolationError, DivergenceError
from pan.linear.problem import LinearControlProblem, PapConfig

ScalarField = typing.Callable[[np.ndarray, np.ndarray], np.ndarray]
"""
Vectorised field ``f(U, Y)`` returning an array shaped like its arguments.
"""

Bounds = typing.Tuple[typing.Tuple[float, float], typing.Tuple[float, float]]


def _axes(bounds: Bounds, resolution: int) -> typing.Tuple[np.ndarray, np.ndarray]:
    if resolution < 3:
        raise ContractViolationError(f'resolution must be at least 3, got {resolution}')
    (u_lo, u_hi), (y_lo, y_hi) = bounds
    return np.linspace(u_lo, u_hi, resolution), np.linspace(y_lo, y_hi, resolution)


def _evaluate(f: ScalarField, bounds: Bounds, resolution: int) -> typing.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    u_axis, y_axis = _axes(bounds, resolution)
    U, Y = np.meshgrid(u_axis, y_axis, indexing='ij')
    values = np.broadcast_to(np.asarray(f(U, Y), dtype=np.float64), U.shape)
    return U, Y, values


def grid_minimize(f: ScalarField, bounds: Bounds, resolution: int) -> typing.Tuple[typing.Tuple[float, float], float]:
    """
    Finds the grid point with the smallest field value.

    Ties go to the lexicographically smallest ``(u, y)``: the grid is laid
    out with ``u`` as the slow axis, so the first flat argmin is that point.

    Example:

    ::

        problem = toy_problem()
        (u, y), value = grid_minimize(penalty_field(problem, 0.5), ((-2, 3), (-2, 3)), 2001)

    :param f: Vectorised field.
    :param bounds: ``((u_min, u_max), (y_min, y_max))``.
    :param resolution: Points per axis, at least 3.
    :return: ``((u, y), value)``.
    """
    U, Y, values = _evaluate(f, bounds, resolution)
    if not np.all(np.isfinite(values)):
        raise DivergenceError('field has non-finite values on the grid')
    index = np.unravel_index(np.argmin(values), values.shape)
    return (float(U[index]), float(Y[index])), float(values[index])


def contour_grid(f: ScalarField, bounds: Bounds, resolution: int) -> pd.DataFrame:
    """
    Samples a field on a regular grid.

    :param f: Vectorised field.
    :param bounds: ``((u_min, u_max), (y_min, y_max))``.
    :param resolution: Points per axis, at least 3.
    :return: Row-major table with columns ``u``, ``y``, ``value``.
    """
    U, Y, values = _evaluate(f, bounds, resolution)
    return pd.DataFrame({'u': U.ravel(), 'y': Y.ravel(), 'value': values.ravel()})


def _scalar_coefficients(problem: LinearControlProblem) -> typing.Tuple[float, float, float, float]:
    if problem.n != 1 or problem.m != 1 or problem.A.shape[0] != 1:
        raise ContractViolationError(f'grid fields need a scalar problem, got {problem!r}')
    return float(problem.A[0, 0]), float(problem.K[0, 0]), float(problem.b[0]), problem.rho


def objective_field(problem: LinearControlProblem) -> ScalarField:
    """
    ``J`` of a scalar problem as a vectorised field.
    """
    a, k, b, rho = _scalar_coefficients(problem)
    return lambda U, Y: 0.5 * (a * U - b) ** 2 + 0.5 * rho * Y ** 2


def remainder_field(problem: LinearControlProblem) -> ScalarField:
    _, k, _, _ = _scalar_coefficients(problem)
    return lambda U, Y: (k * U - Y) ** 2


def penalty_field(problem: LinearControlProblem, lam: float) -> ScalarField:
    """
    ``P^λ`` of a scalar problem as a vectorised field.
    """
    objective, remainder = objective_field(problem), remainder_field(problem)
    return lambda U, Y: objective(U, Y) + 0.5 * lam * remainder(U, Y)


def pap_field(problem: LinearControlProblem, config: PapConfig, anchor_objective: float) -> ScalarField:
    """
    ``A^{λ1,λ2}_{ω,k}`` of a scalar problem as a vectorised field.
    """
    objective, remainder = objective_field(problem), remainder_field(problem)

    def field(U, Y):
        J = objective(U, Y)
        gap = np.maximum(J - anchor_objective, 0.0)
        return J + 0.5 * config.lambda1 * remainder(U, Y) + config.omega * gap ** config.power_k

    return field
