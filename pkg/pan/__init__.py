"""
Penalty adversarial training for constrained optimisation.

The linear form of the method lives in :py:mod:`pan.linear`, the hand-written
differentiable networks in :py:mod:`pan.net`, the PDE control benchmarks in
:py:mod:`pan.problems` and the solver/discriminator loop in
:py:mod:`pan.training`.
"""
import logging

__version__ = '0.1.0'

logging.getLogger(__name__).addHandler(logging.NullHandler())

from pan.exceptions import (  # noqa: E402
    ConditionFailedError,
    ConfigError,
    ContractViolationError,
    DivergenceError,
    DomainError,
    EmptyBandError,
    NonFiniteError,
    OutputExistsError,
    PanError,
    SingularSystemError,
    UnsupportedOperationError
)
from pan.linear import (  # noqa: E402
    LinearControlProblem,
    PapConfig,
    PapPoint,
    anchor,
    evaluate_objective,
    evaluate_pap,
    evaluate_remainder,
    exact_solution,
    minimize_pap,
    penalty_solution,
    toy_problem
)
from pan.problems import get_problem  # noqa: E402
from pan.training import TrainerConfig, load_config, train  # noqa: E402
