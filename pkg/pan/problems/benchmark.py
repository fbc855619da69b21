import typing
from abc import ABC, abstractmethod

import numpy as np

from pan.exceptions import UnsupportedOperationError
from pan.net.tape import ArrayLike
from pan.problems.samples import SampleSet


def coordinates(coords: typing.Any, dim: int) -> np.ndarray:
    """
    Coerces one point or a batch into a ``samples × dim`` array.
    """
    batch = np.asarray(coords, dtype=np.float64)
    if batch.ndim == 0:
        batch = batch.reshape(1, 1)
    elif batch.ndim == 1:
        batch = batch.reshape(-1, 1) if dim == 1 else batch.reshape(1, -1)
    return batch


def laplacian_of(hessian_diagonal: ArrayLike) -> ArrayLike:
    """
    Sums the columns of a ``samples × dim`` array of pure second derivatives.
    """
    total = hessian_diagonal[:, 0]
    for i in range(1, hessian_diagonal.shape[1]):
        total = total + hessian_diagonal[:, i]
    return total


class ControlBenchmark(ABC):
    """
    A PDE-constrained optimal control problem on the unit interval or square
    with a manufactured analytic optimum.

    Network outputs are the state ``u`` in column 0 and, for distributed
    control, the control ``f`` in column 1. Pointwise methods accept one
    point or a ``samples × spatial_dim`` batch and return one value per point.
    """

    name: str
    """
    Registry name, used in run configurations.
    """

    spatial_dim: int
    output_dim: int

    rho: float
    """
    Tikhonov weight on the control.
    """

    @abstractmethod
    def desired_state(self, coords: typing.Any) -> np.ndarray:
        pass

    @abstractmethod
    def analytic_solution(self, coords: typing.Any) -> np.ndarray:
        pass

    def analytic_control(self, coords: typing.Any) -> np.ndarray:
        raise UnsupportedOperationError(f'{self.name} has no distributed control')

    @abstractmethod
    def analytic_gradient(self, coords: typing.Any) -> np.ndarray:
        """
        ``samples × spatial_dim`` first derivatives of the analytic state.
        """
        pass

    @abstractmethod
    def analytic_laplacian(self, coords: typing.Any) -> np.ndarray:
        pass

    @abstractmethod
    def pde_residual(self, coords: typing.Any, value: ArrayLike, hessian_diagonal: ArrayLike,
                     control_value: typing.Optional[ArrayLike] = None) -> ArrayLike:
        """
        Signed residual of the state equation.

        :param coords: Batch of interior points.
        :param value: State ``u`` per point.
        :param hessian_diagonal: ``samples × spatial_dim`` pure second derivatives of ``u``.
        :param control_value: Control ``f`` per point, ignored for boundary control.
        :return: One residual per point.
        """
        pass

    @abstractmethod
    def objective(self, samples: SampleSet, interior_output: ArrayLike, boundary_output: ArrayLike) -> ArrayLike:
        """
        The discrete objective ``J`` of a network with the given outputs.
        """
        pass

    def boundary_residual(self, samples: SampleSet, boundary_output: ArrayLike) -> typing.Optional[ArrayLike]:
        """
        Per-point boundary condition violation, ``None`` when the boundary values are the control.
        """
        return boundary_output[:, 0]

    def initial_residual(self, samples: SampleSet, initial_output: typing.Optional[ArrayLike]) \
            -> typing.Optional[ArrayLike]:
        """
        Per-point initial condition violation, ``None`` for stationary problems.
        """
        return None

    @abstractmethod
    def sample_grid(self, n: int, n_boundary: int) -> SampleSet:
        pass

    @property
    def parameters(self) -> dict:
        return {}

    def __repr__(self):
        params = ', '.join(f'{k}={v}' for k, v in self.parameters.items())
        return f'{type(self).__name__}({params})'
