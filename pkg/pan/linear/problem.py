import json
import typing
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from pan.exceptions import ConfigError, ContractViolationError, SingularSystemError

SINGULARITY_TOLERANCE = 1e-10
"""
Smallest singular value, relative to the largest, below which a matrix is treated as singular.
"""


def relative_smallest_singular_value(matrix: np.ndarray) -> float:
    """
    Ratio of the smallest to the largest singular value, ``0`` for a zero matrix.

    :param matrix: A dense matrix.
    :return: The ratio in ``[0, 1]``.
    """
    singular_values = np.linalg.svd(matrix, compute_uv=False)
    if singular_values[0] == 0.0:
        return 0.0
    return float(singular_values[-1] / singular_values[0])


@dataclass(frozen=True, eq=False)
class LinearControlProblem:
    """
    The discretised control problem: minimise ``½‖Au − b‖² + (ρ/2)‖y‖²``
    subject to ``Ku = y``.

    Example:

    ::

        problem = LinearControlProblem(A=[[1.0]], K=[[2.0]], b=[2.0], rho=1.0)
        print(problem.n, problem.m)
    """

    A: np.ndarray
    """
    Observation matrix, ``k × n``.
    """

    K: np.ndarray
    """
    Constraint matrix, ``m × n``.
    """

    b: np.ndarray
    """
    Data vector of length ``k``.
    """

    rho: float
    """
    Tikhonov weight on the control ``y``.
    """

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        K = np.atleast_2d(np.asarray(self.K, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'K', K)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'rho', float(self.rho))

        if not self.rho > 0:
            raise ContractViolationError(f'rho must be positive, got {self.rho}')
        if b.ndim != 1 or A.shape[0] != b.shape[0]:
            raise ContractViolationError(f'b has length {b.shape[0]} but A has {A.shape[0]} rows')
        if A.shape[1] != K.shape[1]:
            raise ContractViolationError(f'A has {A.shape[1]} columns but K has {K.shape[1]}')
        if not 0 < K.shape[0] <= K.shape[1]:
            raise ContractViolationError(f'need 0 < m <= n, got m={K.shape[0]}, n={K.shape[1]}')

        ratio = relative_smallest_singular_value(self.gram(1.0))
        if ratio < SINGULARITY_TOLERANCE:
            raise SingularSystemError('rows of A and K do not span R^n', ratio)

    @property
    def n(self) -> int:
        """
        Dimension of the state ``u``.
        """
        return self.A.shape[1]

    @property
    def m(self) -> int:
        """
        Dimension of the control ``y``.
        """
        return self.K.shape[0]

    @cached_property
    def AtA(self) -> np.ndarray:
        return self.A.T @ self.A

    @cached_property
    def KtK(self) -> np.ndarray:
        return self.K.T @ self.K

    @cached_property
    def Atb(self) -> np.ndarray:
        return self.A.T @ self.b

    def gram(self, alpha: float) -> np.ndarray:
        """
        The matrix ``G_α = AᵀA + αKᵀK``, invertible for every ``α > 0``.

        :param alpha: Weight of the constraint block.
        :return: ``n × n`` matrix.
        """
        return self.AtA + alpha * self.KtK

    def point(self, u: typing.Sequence[float], y: typing.Sequence[float]) -> 'PapPoint':
        """
        Builds a point and checks it against this problem's dimensions.
        """
        p = PapPoint(u, y)
        p.check(self)
        return p

    @classmethod
    def from_dict(cls, data: dict) -> 'LinearControlProblem':
        """
        Builds a problem from the JSON layout ``{"A": .., "K": .., "b": .., "rho": ..}``.

        :param data: Parsed JSON document.
        :return: The problem.
        """
        version = data.get('schema_version', 1)
        if version != 1:
            raise ConfigError(f'unsupported linear problem schema_version {version}')
        try:
            return cls(A=data['A'], K=data['K'], b=data['b'], rho=data['rho'])
        except KeyError as e:
            raise ConfigError(f'linear problem is missing key {e}') from e

    @classmethod
    def load(cls, path: str) -> 'LinearControlProblem':
        """
        Reads a problem from a JSON file.

        :param path: File to read.
        :return: The problem.
        """
        with open(path) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f'{path}:{e.lineno}:{e.colno}: {e.msg}') from e
        return cls.from_dict(data)

    def __repr__(self):
        return f'LinearControlProblem(n={self.n}, m={self.m}, k={self.A.shape[0]}, rho={self.rho})'


def toy_problem(rho: float = 1.0) -> LinearControlProblem:
    """
    The scalar instance ``min ½(u − 2)² + (ρ/2)y²`` subject to ``2u = y``.

    :param rho: Tikhonov weight.
    :return: The problem.
    """
    return LinearControlProblem(A=[[1.0]], K=[[2.0]], b=[2.0], rho=rho)


@dataclass(frozen=True, eq=False)
class PapPoint:
    """
    A candidate ``(u, y)`` pair.
    """

    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'u', np.atleast_1d(np.asarray(self.u, dtype=np.float64)))
        object.__setattr__(self, 'y', np.atleast_1d(np.asarray(self.y, dtype=np.float64)))

    def check(self, problem: LinearControlProblem):
        """
        Raises :py:class:`pan.exceptions.ContractViolationError` on a dimension mismatch.
        """
        if self.u.shape != (problem.n,) or self.y.shape != (problem.m,):
            raise ContractViolationError(
                f'point has shapes u{self.u.shape}, y{self.y.shape}; '
                f'problem needs u({problem.n},), y({problem.m},)')

    @property
    def vector(self) -> np.ndarray:
        """
        The stacked vector ``(u, y)``.
        """
        return np.concatenate([self.u, self.y])

    @classmethod
    def from_vector(cls, vector: np.ndarray, n: int) -> 'PapPoint':
        return cls(vector[:n], vector[n:])

    def distance(self, other: 'PapPoint') -> float:
        """
        Euclidean distance between two points in ``R^(n+m)``.
        """
        return float(np.linalg.norm(self.vector - other.vector))

    def __repr__(self):
        return f'PapPoint(u={self.u.tolist()}, y={self.y.tolist()})'


@dataclass(frozen=True)
class PapConfig:
    """
    Parameters of one penalty adversarial functional ``A^{λ1,λ2}_{ω,k}``.
    """

    lambda1: float
    """
    Large penalty weight.
    """

    lambda2: float
    """
    Small penalty weight defining the anchor.
    """

    omega: float
    """
    Weight of the extra penalty on objective values above the anchor.
    """

    power_k: int = 2
    """
    Power of the extra penalty term.
    """

    def __post_init__(self):
        if not self.lambda1 > self.lambda2 > 0:
            raise ContractViolationError(f'need lambda1 > lambda2 > 0, got {self.lambda1}, {self.lambda2}')
        if not self.omega > 0:
            raise ContractViolationError(f'omega must be positive, got {self.omega}')
        if int(self.power_k) != self.power_k or self.power_k < 1:
            raise ContractViolationError(f'power_k must be an integer >= 1, got {self.power_k}')


class Region(Enum):
    """
    Which side of the anchor objective a point lies on.
    """
    OMEGA1 = 'Omega1'
    OMEGA2 = 'Omega2'


@dataclass(frozen=True)
class PapEvaluation:
    """
    All the pieces of ``A^{λ1,λ2}_{ω,k}`` at one point.
    """

    objective: float
    remainder: float
    adversarial_value: float
    objective_gap: float
    region: Region = field(default=Region.OMEGA2)
