"""
Distributed control of the 2D Poisson equation on the unit square:
minimise ``½∫(u − u_d)² + (ρ/2)∫f²`` subject to ``−Δu = f``, ``u = 0`` on
the boundary, with ``u_d = A sin(πx) sin(πy)``.
"""
import math
import typing

import numpy as np

from pan.exceptions import ContractViolationError
from pan.net.tape import ArrayLike
from pan.problems.benchmark import ControlBenchmark, coordinates, laplacian_of
from pan.problems.samples import SampleSet, grid_2d


def distributed_objective(rho: float, desired: np.ndarray, interior_output: ArrayLike) -> ArrayLike:
    """
    ``mean((u − u_d)²)/2 + ρ·mean(f²)/2`` over the interior grid.
    """
    misfit = interior_output[:, 0] - desired
    control = interior_output[:, 1]
    return 0.5 * (misfit * misfit).mean() + 0.5 * rho * (control * control).mean()


class DistributedControl2DPoisson(ControlBenchmark):
    name = 'poisson2d-distributed'
    spatial_dim = 2
    output_dim = 2

    def __init__(self, amplitude: float = 10.0, rho: float = 0.01):
        if not rho > 0:
            raise ContractViolationError(f'rho must be positive, got {rho}')
        self.amplitude = amplitude
        self.rho = rho

    @property
    def scale(self) -> float:
        """
        Amplitude of the optimal state, ``A / (1 + 4ρπ⁴)``.
        """
        return self.amplitude / (1 + 4 * self.rho * math.pi ** 4)

    @property
    def parameters(self) -> dict:
        return {'amplitude': self.amplitude, 'rho': self.rho}

    @staticmethod
    def _mode(coords: typing.Any) -> typing.Tuple[np.ndarray, np.ndarray]:
        p = coordinates(coords, 2)
        return p[:, 0], p[:, 1]

    def desired_state(self, coords: typing.Any) -> np.ndarray:
        x, y = self._mode(coords)
        return self.amplitude * np.sin(math.pi * x) * np.sin(math.pi * y)

    def analytic_solution(self, coords: typing.Any) -> np.ndarray:
        x, y = self._mode(coords)
        return self.scale * np.sin(math.pi * x) * np.sin(math.pi * y)

    def analytic_control(self, coords: typing.Any) -> np.ndarray:
        return 2 * math.pi ** 2 * self.analytic_solution(coords)

    def analytic_gradient(self, coords: typing.Any) -> np.ndarray:
        x, y = self._mode(coords)
        c = self.scale * math.pi
        return np.column_stack([c * np.cos(math.pi * x) * np.sin(math.pi * y),
                                c * np.sin(math.pi * x) * np.cos(math.pi * y)])

    def analytic_laplacian(self, coords: typing.Any) -> np.ndarray:
        return -2 * math.pi ** 2 * self.analytic_solution(coords)

    def pde_residual(self, coords: typing.Any, value: ArrayLike, hessian_diagonal: ArrayLike,
                     control_value: typing.Optional[ArrayLike] = None) -> ArrayLike:
        return laplacian_of(hessian_diagonal) + control_value

    def objective(self, samples: SampleSet, interior_output: ArrayLike, boundary_output: ArrayLike) -> ArrayLike:
        return distributed_objective(self.rho, self.desired_state(samples.interior), interior_output)

    def sample_grid(self, n: int, n_boundary: int) -> SampleSet:
        return grid_2d(n, n_boundary)
