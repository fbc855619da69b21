"""
Gradient descent with Armijo backtracking on ``A^{λ1,λ2}_{ω,k}`` and ``P^λ``.
"""
import logging
import typing
from dataclasses import dataclass

import numpy as np

from pan.exceptions import DivergenceError
from pan.linear.adversarial import evaluate_pap, pap_gradient
from pan.linear.problem import LinearControlProblem, PapConfig, PapPoint
from pan.linear.solution import evaluate_penalty, penalty_gradient

log = logging.getLogger(__name__)

ValueAndGradient = typing.Callable[[np.ndarray], typing.Tuple[float, np.ndarray]]


@dataclass(frozen=True)
class DescentOptions:
    """
    Stopping and line-search parameters.
    """

    max_iterations: int = 50000
    gradient_tolerance: float = 1e-10
    initial_step: float = 1.0

    armijo_c: float = 1e-4
    """
    Sufficient decrease constant in ``(0, 1)``.
    """

    shrink: float = 0.5
    """
    Factor applied to the step after every rejected trial.
    """

    max_backtracks: int = 60


@dataclass(frozen=True)
class DescentResult:
    point: PapPoint
    value: float
    gradient_norm: float
    iterations: int
    converged: bool

    def __repr__(self):
        return (f'DescentResult(point={self.point!r}, value={self.value:.10g}, '
                f'gradient_norm={self.gradient_norm:.3e}, iterations={self.iterations}, '
                f'converged={self.converged})')


def armijo_step(fg: ValueAndGradient, x: np.ndarray, value: float, gradient: np.ndarray,
                options: DescentOptions) -> typing.Optional[float]:
    """
    Backtracks along ``−∇f`` until ``f(x − αg) ≤ f(x) − cα‖g‖²``.

    :param fg: Returns ``(f(x), ∇f(x))``.
    :param x: Current iterate.
    :param value: ``f(x)``.
    :param gradient: ``∇f(x)``.
    :param options: Line-search parameters.
    :return: The accepted step, or ``None`` when no trial step decreases ``f`` enough.
    """
    slope = float(gradient @ gradient)
    step = options.initial_step
    for _ in range(options.max_backtracks):
        trial, _ = fg(x - step * gradient)
        if np.isfinite(trial) and trial <= value - options.armijo_c * step * slope:
            return step
        step *= options.shrink
    return None


def descend(fg: ValueAndGradient, x0: np.ndarray, n: int,
            options: typing.Optional[DescentOptions] = None) -> DescentResult:
    """
    Minimises a smooth function of the stacked vector ``(u, y)``.

    The best iterate seen is returned with ``converged=False`` when the
    gradient tolerance is not reached within ``max_iterations`` or the
    line search stalls.

    :param fg: Returns ``(f(x), ∇f(x))``.
    :param x0: Starting vector.
    :param n: Length of the ``u`` block.
    :param options: Descent parameters, defaults when omitted.
    :return: The result.
    """
    options = options or DescentOptions()
    x = np.array(x0, dtype=np.float64)
    best_x, best_value, best_norm = x, np.inf, np.inf

    for iteration in range(options.max_iterations + 1):
        value, gradient = fg(x)
        norm = float(np.linalg.norm(gradient))
        if not (np.isfinite(value) and np.isfinite(norm)):
            raise DivergenceError('descent produced non-finite values',
                                  last_good=PapPoint.from_vector(best_x, n), epoch=iteration)
        if value <= best_value:
            best_x, best_value, best_norm = x, value, norm
        if norm < options.gradient_tolerance:
            return DescentResult(PapPoint.from_vector(x, n), value, norm, iteration, True)
        if iteration == options.max_iterations:
            break

        step = armijo_step(fg, x, value, gradient, options)
        if step is None:
            log.debug(f'line search stalled at iteration {iteration} with gradient norm {norm:.3e}')
            break
        x = x - step * gradient

    log.info(f'descent stopped without reaching tolerance {options.gradient_tolerance:g} '
             f'(gradient norm {best_norm:.3e})')
    return DescentResult(PapPoint.from_vector(best_x, n), best_value, best_norm, iteration, False)


def minimize_pap(problem: LinearControlProblem, config: PapConfig, anchor_objective: float,
                 init: PapPoint, options: typing.Optional[DescentOptions] = None) -> DescentResult:
    """
    Minimises ``A^{λ1,λ2}_{ω,k}`` from ``init``.

    Example:

    ::

        problem = toy_problem()
        _, j2, _ = anchor(problem, 0.5)
        result = minimize_pap(problem, PapConfig(5, 0.5, 1), j2, problem.point([0], [0]))
        print(result.point)

    :param problem: The problem.
    :param config: Functional parameters.
    :param anchor_objective: Objective value at the anchor.
    :param init: Starting point.
    :param options: Descent parameters.
    :return: The result; ``result.point`` is the minimiser.
    """
    init.check(problem)

    def fg(x: np.ndarray):
        point = PapPoint.from_vector(x, problem.n)
        value = evaluate_pap(problem, config, anchor_objective, point).adversarial_value
        return value, pap_gradient(problem, config, anchor_objective, point)

    return descend(fg, init.vector, problem.n, options)


def minimize_penalty(problem: LinearControlProblem, lam: float, init: PapPoint,
                     options: typing.Optional[DescentOptions] = None) -> DescentResult:
    """
    Minimises ``P^λ`` from ``init`` with the same scheme as :py:func:`minimize_pap`.
    """
    init.check(problem)

    def fg(x: np.ndarray):
        point = PapPoint.from_vector(x, problem.n)
        return evaluate_penalty(problem, point, lam), penalty_gradient(problem, point, lam)

    return descend(fg, init.vector, problem.n, options)
