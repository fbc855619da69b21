"""
Run configuration, read from a versioned JSON document.

Example:

::

    {
        "schema_version": 1,
        "label": "ex1-pan",
        "problem": "poisson1d-boundary",
        "mode": "pan",
        "grid": {"n": 32},
        "solver": {"depth": 4, "width": 40, "learning_rate": 0.001,
                   "weights": {"pde": 5000}},
        "discriminator": {"depth": 4, "width": 40, "learning_rate": 0.001,
                          "weights": {"pde": 1}},
        "omega": 1,
        "max_epochs": 200000
    }
"""
import dataclasses
import json
import typing
import warnings
from dataclasses import dataclass, field
from enum import Enum

from pan.exceptions import ConfigError, WeightOrderingWarning

SCHEMA_VERSION = 1

_TOP_LEVEL_KEYS = {
    'schema_version', 'label', 'problem', 'problem_parameters', 'mode', 'grid', 'solver', 'discriminator',
    'omega', 'min_learning_rate', 'patience', 'warmup_epochs', 'max_epochs', 'seed', 'optimizer',
    'schedule_start_epoch', 'one_sided', 'freeze_discriminator_after', 'log_every'
}


class Mode(Enum):
    PAN = 'pan'
    """
    Solver and discriminator trained jointly.
    """

    PENALTY = 'penalty'
    """
    A single network on the plain penalty loss.
    """


class OptimizerKind(Enum):
    SGD = 'sgd'
    ADAM = 'adam'


@dataclass(frozen=True)
class PenaltyWeights:
    """
    Weights of the PDE, boundary and initial condition terms of one network's loss.
    """

    lambda_p: float = 0.0
    lambda_b: float = 0.0
    lambda_i: float = 0.0

    def __post_init__(self):
        for name in ('lambda_p', 'lambda_b', 'lambda_i'):
            if getattr(self, name) < 0:
                raise ConfigError(f'penalty weight {name} must be non-negative, got {getattr(self, name)}')

    def dominates(self, other: 'PenaltyWeights') -> bool:
        return self.lambda_p >= other.lambda_p and self.lambda_b >= other.lambda_b and self.lambda_i >= other.lambda_i

    @classmethod
    def from_dict(cls, data: dict) -> 'PenaltyWeights':
        unknown = set(data) - {'pde', 'boundary', 'initial'}
        if unknown:
            raise ConfigError(f'unknown penalty weight keys {sorted(unknown)}')
        return cls(float(data.get('pde', 0.0)), float(data.get('boundary', 0.0)), float(data.get('initial', 0.0)))

    def to_dict(self) -> dict:
        return {'pde': self.lambda_p, 'boundary': self.lambda_b, 'initial': self.lambda_i}


@dataclass(frozen=True)
class NetworkConfig:
    depth: int = 4
    width: int = 40
    learning_rate: float = 1e-3
    weights: PenaltyWeights = field(default_factory=PenaltyWeights)

    def __post_init__(self):
        if self.depth < 1 or self.width < 1:
            raise ConfigError(f'depth and width must be positive, got {self.depth}, {self.width}')
        if not self.learning_rate > 0:
            raise ConfigError(f'learning_rate must be positive, got {self.learning_rate}')

    @classmethod
    def from_dict(cls, data: dict) -> 'NetworkConfig':
        unknown = set(data) - {'depth', 'width', 'learning_rate', 'weights'}
        if unknown:
            raise ConfigError(f'unknown network keys {sorted(unknown)}')
        return cls(depth=int(data.get('depth', 4)),
                   width=int(data.get('width', 40)),
                   learning_rate=float(data.get('learning_rate', 1e-3)),
                   weights=PenaltyWeights.from_dict(data.get('weights', {})))

    def to_dict(self) -> dict:
        return {'depth': self.depth, 'width': self.width, 'learning_rate': self.learning_rate,
                'weights': self.weights.to_dict()}


@dataclass(frozen=True)
class TrainerConfig:
    """
    Everything one training run needs.
    """

    problem: str
    solver: NetworkConfig
    discriminator: typing.Optional[NetworkConfig] = None
    mode: Mode = Mode.PAN
    label: str = ''
    problem_parameters: typing.Dict[str, float] = field(default_factory=dict)

    n: int = 32
    """
    Interior points per axis.
    """

    n_boundary: int = 2

    omega: float = 1.0
    """
    Weight of the squared objective gap between solver and discriminator.
    """

    min_learning_rate: float = 1e-4
    patience: int = 3000

    warmup_epochs: typing.Optional[int] = None
    """
    Epochs before best-weight tracking starts; 5% of ``max_epochs`` when ``None``.
    """

    max_epochs: int = 200000
    seed: int = 0
    optimizer: OptimizerKind = OptimizerKind.ADAM

    schedule_start_epoch: int = 0
    """
    No learning rate halving happens before this epoch.
    """

    one_sided: bool = False
    """
    Penalise only a solver objective above the discriminator's, ``max(J^s − J^d, 0)²``.
    """

    freeze_discriminator_after: typing.Optional[int] = None
    log_every: int = 1000

    def __post_init__(self):
        object.__setattr__(self, 'mode', Mode(self.mode))
        object.__setattr__(self, 'optimizer', OptimizerKind(self.optimizer))
        if self.warmup_epochs is None:
            object.__setattr__(self, 'warmup_epochs', self.max_epochs // 20)

        if self.mode == Mode.PAN and self.discriminator is None:
            raise ConfigError('pan mode needs a discriminator network')
        if self.max_epochs < 0:
            raise ConfigError(f'max_epochs must be non-negative, got {self.max_epochs}')
        if self.omega < 0:
            raise ConfigError(f'omega must be non-negative, got {self.omega}')
        if self.patience < 1:
            raise ConfigError(f'patience must be at least 1, got {self.patience}')
        if self.warmup_epochs < 0 or (self.max_epochs > 0 and self.warmup_epochs >= self.max_epochs):
            raise ConfigError(f'need 0 <= warmup_epochs < max_epochs, got {self.warmup_epochs}, {self.max_epochs}')
        if self.log_every < 1:
            raise ConfigError(f'log_every must be at least 1, got {self.log_every}')
        for network in self.networks:
            if not 0 < self.min_learning_rate <= network.learning_rate:
                raise ConfigError(f'need 0 < min_learning_rate <= learning_rate, '
                                  f'got {self.min_learning_rate}, {network.learning_rate}')

        if self.mode == Mode.PAN and not self.solver.weights.dominates(self.discriminator.weights):
            warnings.warn(f'solver weights {self.solver.weights} are below discriminator weights '
                          f'{self.discriminator.weights}', WeightOrderingWarning)

    @property
    def networks(self) -> typing.List[NetworkConfig]:
        return [self.solver] if self.discriminator is None else [self.solver, self.discriminator]

    def with_max_epochs(self, max_epochs: int) -> 'TrainerConfig':
        """
        A copy with a different budget; the warmup is rescaled when it was defaulted.
        """
        warmup = self.warmup_epochs
        if warmup >= max_epochs or warmup == self.max_epochs // 20:
            warmup = max_epochs // 20
        return dataclasses.replace(self, max_epochs=max_epochs, warmup_epochs=warmup)

    def with_seed(self, seed: int) -> 'TrainerConfig':
        return dataclasses.replace(self, seed=seed)

    @classmethod
    def from_dict(cls, data: dict) -> 'TrainerConfig':
        version = data.get('schema_version')
        if version != SCHEMA_VERSION:
            raise ConfigError(f'unsupported schema_version {version!r}, expected {SCHEMA_VERSION}')
        unknown = set(data) - _TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f'unknown configuration keys {sorted(unknown)}')

        try:
            grid = data.get('grid', {})
            discriminator = data.get('discriminator')
            return cls(
                problem=data['problem'],
                label=data.get('label', ''),
                problem_parameters=dict(data.get('problem_parameters', {})),
                mode=Mode(data.get('mode', 'pan')),
                n=int(grid.get('n', 32)),
                n_boundary=int(grid.get('n_boundary', 2)),
                solver=NetworkConfig.from_dict(data['solver']),
                discriminator=None if discriminator is None else NetworkConfig.from_dict(discriminator),
                omega=float(data.get('omega', 1.0)),
                min_learning_rate=float(data.get('min_learning_rate', 1e-4)),
                patience=int(data.get('patience', 3000)),
                warmup_epochs=data.get('warmup_epochs'),
                max_epochs=int(data.get('max_epochs', 200000)),
                seed=int(data.get('seed', 0)),
                optimizer=OptimizerKind(data.get('optimizer', 'adam')),
                schedule_start_epoch=int(data.get('schedule_start_epoch', 0)),
                one_sided=bool(data.get('one_sided', False)),
                freeze_discriminator_after=data.get('freeze_discriminator_after'),
                log_every=int(data.get('log_every', 1000)),
            )
        except KeyError as e:
            raise ConfigError(f'configuration is missing key {e}') from e
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f'invalid configuration value: {e}') from e

    def to_dict(self) -> dict:
        data = {
            'schema_version': SCHEMA_VERSION,
            'label': self.label,
            'problem': self.problem,
            'problem_parameters': dict(self.problem_parameters),
            'mode': self.mode.value,
            'grid': {'n': self.n, 'n_boundary': self.n_boundary},
            'solver': self.solver.to_dict(),
            'omega': self.omega,
            'min_learning_rate': self.min_learning_rate,
            'patience': self.patience,
            'warmup_epochs': self.warmup_epochs,
            'max_epochs': self.max_epochs,
            'seed': self.seed,
            'optimizer': self.optimizer.value,
            'schedule_start_epoch': self.schedule_start_epoch,
            'one_sided': self.one_sided,
            'freeze_discriminator_after': self.freeze_discriminator_after,
            'log_every': self.log_every,
        }
        if self.discriminator is not None:
            data['discriminator'] = self.discriminator.to_dict()
        return data


def load_config(path: str) -> TrainerConfig:
    """
    Reads a :py:class:`TrainerConfig` from a JSON file.

    :param path: Configuration file.
    :return: The parsed configuration.
    """
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f'{path}:{e.lineno}:{e.colno}: {e.msg}') from e
    except OSError as e:
        raise ConfigError(f'{path}: {e.strerror}') from e
    if not isinstance(data, dict):
        raise ConfigError(f'{path}: expected a JSON object at the top level')
    try:
        return TrainerConfig.from_dict(data)
    except ConfigError as e:
        raise ConfigError(f'{path}: {e}') from e
