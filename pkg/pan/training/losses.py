"""
Discrete losses of the penalty, discriminator and solver networks.

Every loss is ``J + λ_p·pde + λ_b·boundary + λ_i·initial``, with the mean
squared residuals over the fixed sample grid. The solver adds
``ω·(J^s − J^d)²`` where the discriminator objective ``J^d`` enters as a
constant, so no gradient reaches the discriminator.
"""
import typing
from dataclasses import asdict, dataclass

import numpy as np

from pan.net.mlp import MlpNet, MlpSpec, value_and_gradient
from pan.net.tape import ArrayLike, value_of
from pan.problems.benchmark import ControlBenchmark
from pan.problems.samples import SampleSet
from pan.training.config import PenaltyWeights


@dataclass(frozen=True)
class LossBreakdown:
    objective: float
    pde: float
    boundary: float
    initial: float
    adversarial: float
    total: float

    def to_dict(self, prefix: str = '') -> typing.Dict[str, float]:
        return {f'{prefix}{key}': value for key, value in asdict(self).items()}


def _mean_square(residual: typing.Optional[ArrayLike]) -> ArrayLike:
    if residual is None:
        return 0.0
    return (residual * residual).mean()


def network_terms(problem: ControlBenchmark, net: MlpNet, samples: SampleSet) -> typing.Dict[str, ArrayLike]:
    """
    Objective and mean squared residuals of one network, unweighted.
    """
    ev = net.second_order(samples.interior)
    value = ev.value
    control = value[:, 1] if problem.output_dim > 1 else None
    residual = problem.pde_residual(samples.interior, value[:, 0], ev.input_hessian_diagonal[:, 0, :], control)

    boundary_output = net(samples.boundary)
    initial_output = None if samples.initial is None else net(samples.initial)
    return {
        'objective': problem.objective(samples, value, boundary_output),
        'pde': _mean_square(residual),
        'boundary': _mean_square(problem.boundary_residual(samples, boundary_output)),
        'initial': _mean_square(problem.initial_residual(samples, initial_output)),
    }


def assemble(problem: ControlBenchmark, net: MlpNet, samples: SampleSet, weights: PenaltyWeights,
             omega: float = 0.0, discriminator_objective: typing.Optional[float] = None,
             one_sided: bool = False) -> typing.Tuple[ArrayLike, LossBreakdown]:
    """
    Builds the weighted loss of one network.

    :param problem: The benchmark.
    :param net: The network, recording or not.
    :param samples: Collocation points.
    :param weights: Penalty weights.
    :param omega: Weight of the adversarial term.
    :param discriminator_objective: ``J^d``; ``None`` leaves the adversarial term out.
    :param one_sided: Square only a positive gap.
    :return: The total (a tensor for a recording network) and its breakdown.
    """
    terms = network_terms(problem, net, samples)
    total = (terms['objective'] + weights.lambda_p * terms['pde'] + weights.lambda_b * terms['boundary']
             + weights.lambda_i * terms['initial'])

    adversarial = 0.0
    if discriminator_objective is not None:
        gap = terms['objective'] - discriminator_objective
        if one_sided and float(value_of(gap)) <= 0:
            gap = 0.0
        adversarial = gap * gap
        if omega != 0:
            total = total + omega * adversarial

    breakdown = LossBreakdown(**{key: float(value_of(value)) for key, value in terms.items()},
                              adversarial=float(value_of(adversarial)), total=float(value_of(total)))
    return total, breakdown


def _with_gradient(spec: MlpSpec, params: np.ndarray, build) -> typing.Tuple[LossBreakdown, np.ndarray]:
    captured = {}

    def loss(net):
        total, captured['breakdown'] = build(net)
        return total

    _, gradient = value_and_gradient(spec, params, loss)
    return captured['breakdown'], gradient


def penalty_loss(problem: ControlBenchmark, spec: MlpSpec, params: np.ndarray, samples: SampleSet,
                 weights: PenaltyWeights) -> LossBreakdown:
    """
    The plain penalty loss ``L_P``.

    Example:

    ::

        problem = BoundaryControl1D()
        spec = MlpSpec(1, 1, 4, 40)
        loss = penalty_loss(problem, spec, init_params(spec, 0), problem.sample_grid(32, 2),
                            PenaltyWeights(lambda_p=5000))
        print(loss.total)
    """
    return assemble(problem, MlpNet(spec, params), samples, weights)[1]


def discriminator_loss(problem: ControlBenchmark, spec: MlpSpec, params: np.ndarray, samples: SampleSet,
                       weights: PenaltyWeights) -> LossBreakdown:
    """
    ``L^d``: the penalty loss with the discriminator's small weights.
    """
    return penalty_loss(problem, spec, params, samples, weights)


def solver_loss(problem: ControlBenchmark, spec: MlpSpec, params: np.ndarray, discriminator_objective: float,
                samples: SampleSet, weights: PenaltyWeights, omega: float, one_sided: bool = False) -> LossBreakdown:
    """
    ``L^s``: the penalty loss with the solver's large weights plus ``ω(J^s − J^d)²``.
    """
    return assemble(problem, MlpNet(spec, params), samples, weights, omega, discriminator_objective, one_sided)[1]


def penalty_loss_gradient(problem: ControlBenchmark, spec: MlpSpec, params: np.ndarray, samples: SampleSet,
                          weights: PenaltyWeights) -> typing.Tuple[LossBreakdown, np.ndarray]:
    """
    :py:func:`penalty_loss` with its parameter gradient.
    """
    return _with_gradient(spec, params, lambda net: assemble(problem, net, samples, weights))


def solver_loss_gradient(problem: ControlBenchmark, spec: MlpSpec, params: np.ndarray,
                         discriminator_objective: float, samples: SampleSet, weights: PenaltyWeights,
                         omega: float, one_sided: bool = False) -> typing.Tuple[LossBreakdown, np.ndarray]:
    """
    :py:func:`solver_loss` with its parameter gradient.
    """
    return _with_gradient(spec, params, lambda net: assemble(problem, net, samples, weights, omega,
                                                             discriminator_objective, one_sided))
