"""
The penalty adversarial functional ``A^{λ1,λ2}_{ω,k}`` and the conditions
under which its minimiser satisfies the constraint better than the
small-penalty solution.
"""
import math
import typing
import warnings

import numpy as np

from pan.exceptions import ConditionFailedError, DomainError, EmptyBandError, NonSmoothGradientWarning
from pan.linear.problem import LinearControlProblem, PapConfig, PapEvaluation, PapPoint, Region
from pan.linear.solution import (
    anchor,
    evaluate_objective,
    evaluate_remainder,
    exact_solution,
    objective_gradient,
    remainder_gradient
)

CONSTRAINT_IMAGE_TOLERANCE = 1e-12


class TheoremCondition(typing.NamedTuple):
    """
    Outcome of :py:func:`theorem_condition`.
    """
    holds: bool
    margin: float


class OmegaBound(typing.NamedTuple):
    """
    Outcome of :py:func:`omega_upper_bound`. ``bounded`` is ``False`` when any ω works.
    """
    value: float
    bounded: bool


def evaluate_pap(problem: LinearControlProblem, config: PapConfig, anchor_objective: float,
                 point: PapPoint) -> PapEvaluation:
    """
    Evaluates ``A^{λ1,λ2}_{ω,k}`` at a point.

    Ω1 is the open set where the objective exceeds ``anchor_objective``;
    there the functional carries the extra term ``ω|J − J_anchor|^k``.

    Example:

    ::

        problem = toy_problem()
        _, j2, _ = anchor(problem, 0.5)
        evaluation = evaluate_pap(problem, PapConfig(5, 0.5, 1), j2, exact_solution(problem))
        print(evaluation.region, evaluation.adversarial_value)

    :param problem: The problem.
    :param config: ``(λ1, λ2, ω, k)``.
    :param anchor_objective: ``J(u^{λ2}, y^{λ2})`` or another admissible anchor; not recomputed here.
    :param point: Where to evaluate.
    :return: The evaluation.
    """
    objective = evaluate_objective(problem, point)
    remainder = evaluate_remainder(problem, point)
    gap = objective - anchor_objective
    value = objective + 0.5 * config.lambda1 * remainder
    if gap > 0:
        return PapEvaluation(objective, remainder, value + config.omega * gap ** config.power_k, gap, Region.OMEGA1)
    return PapEvaluation(objective, remainder, value, gap, Region.OMEGA2)


def pap_gradient(problem: LinearControlProblem, config: PapConfig, anchor_objective: float,
                 point: PapPoint) -> np.ndarray:
    """
    Analytic gradient of ``A^{λ1,λ2}_{ω,k}``:
    ``(1 + ωk·D^{k−1})∇J + (λ1/2)∇R`` on Ω1 and ``∇P^{λ1}`` on Ω2, with ``D = J − J_anchor``.

    For ``k = 1`` the functional has a kink on the boundary ``D = 0``; the Ω2
    branch is returned there and a :py:class:`pan.exceptions.NonSmoothGradientWarning`
    is issued.

    :return: Gradient with respect to the stacked vector ``(u, y)``.
    """
    grad_objective = objective_gradient(problem, point)
    grad_remainder = remainder_gradient(problem, point)
    gap = evaluate_objective(problem, point) - anchor_objective

    scale = 1.0
    if gap > 0:
        scale += config.omega * config.power_k * gap ** (config.power_k - 1)
    elif gap == 0 and config.power_k == 1:
        warnings.warn('gradient requested on the Omega1/Omega2 boundary with k=1', NonSmoothGradientWarning)
    return scale * grad_objective + 0.5 * config.lambda1 * grad_remainder


def equivalent_lambda(config: PapConfig, objective: float, anchor_objective: float) -> float:
    """
    Penalty weight ``λ̃ = λ1 / (1 + 2ω(J − J_anchor))`` whose penalty gradient
    points the same way as the adversarial gradient at a point of Ω1 (``k = 2``).

    :param config: Functional parameters, ``power_k`` must be 2.
    :param objective: ``J`` at the point.
    :param anchor_objective: ``J`` at the anchor.
    :return: ``λ̃`` in ``(0, λ1]``.
    """
    if config.power_k != 2:
        raise DomainError(f'equivalent lambda is defined for k=2, got k={config.power_k}')
    if objective < anchor_objective:
        raise DomainError('equivalent lambda is only defined on the closure of Omega1')
    return config.lambda1 / (1.0 + 2.0 * config.omega * (objective - anchor_objective))


def _gap_and_remainder(problem: LinearControlProblem, lambda2: float) -> tuple:
    point, anchor_objective, anchor_remainder = anchor(problem, lambda2)
    gap = evaluate_objective(problem, exact_solution(problem)) - anchor_objective
    return point, gap, anchor_remainder


def theorem_condition(problem: LinearControlProblem, lambda1: float, lambda2: float) -> TheoremCondition:
    """
    Checks the sufficient condition under which some ω makes the adversarial
    minimiser violate the constraint less than ``(u^{λ2}, y^{λ2})``:
    ``Ku^{λ2} ≠ 0`` and ``(λ1/2)R(u^{λ2}) > J(û) − J(u^{λ2})``.

    The positive margin certifies that a slack ``σ > 0`` exists.

    :return: ``(holds, margin)``.
    """
    point, gap, anchor_remainder = _gap_and_remainder(problem, lambda2)
    margin = 0.5 * lambda1 * anchor_remainder - gap
    image_norm = float(np.linalg.norm(problem.K @ point.u))
    return TheoremCondition(image_norm > CONSTRAINT_IMAGE_TOLERANCE and margin > 0, margin)


def omega_upper_bound(problem: LinearControlProblem, lambda1: float, lambda2: float) -> OmegaBound:
    """
    Upper bound on ω:
    ``[λ1 R(u^{λ2}) − 2(J(û) − J(u^{λ2}))] / (2(J(û) − J(u^{λ2}))²)``.

    :return: The bound, or ``OmegaBound(inf, False)`` when ``J(û) = J(u^{λ2})``.
    """
    _, gap, anchor_remainder = _gap_and_remainder(problem, lambda2)
    numerator = lambda1 * anchor_remainder - 2.0 * gap
    if numerator <= 0:
        raise ConditionFailedError(f'theorem condition fails: numerator {numerator:.6g} <= 0')
    if gap == 0:
        return OmegaBound(math.inf, False)
    return OmegaBound(numerator / (2.0 * gap * gap), True)


def admissible_objective_band(problem: LinearControlProblem, config: PapConfig, anchor_objective: float,
                              anchor_remainder: float, remainder_at_point: float) -> typing.Tuple[float, float]:
    """
    The open band of objective values for which a point with the given
    remainder scores below the anchor on ``A^{λ1,λ2}_ω`` (``k = 2``):
    ``J_anchor < J < J_anchor + λ1ΔR / (1 + √(1 + 2ωλ1ΔR))`` with
    ``ΔR = R_anchor − R``.

    :return: ``(lower, upper)``; equal when ``ΔR = 0``.
    """
    if config.power_k != 2:
        raise DomainError(f'objective band is derived for k=2, got k={config.power_k}')
    delta = anchor_remainder - remainder_at_point
    if delta < 0:
        raise EmptyBandError(f'remainder {remainder_at_point} is above the anchor remainder {anchor_remainder}')
    if delta == 0:
        return anchor_objective, anchor_objective
    width = config.lambda1 * delta / (1.0 + math.sqrt(1.0 + 2.0 * config.omega * config.lambda1 * delta))
    return anchor_objective, anchor_objective + width
