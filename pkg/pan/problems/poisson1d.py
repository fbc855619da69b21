"""
Boundary control of the 1D Poisson equation.

Minimise ``½∫(u − u_d)² + (ρ/2)(u(0)² + u(1)²)`` subject to
``−u'' = A sin(2πx)`` on ``(0, 1)``, with the boundary values ``u(0)``,
``u(1)`` as the control and ``u_d = (A/4π²) sin(2πx) + bx + a``.
"""
import math
import typing

import numpy as np

from pan.exceptions import ContractViolationError
from pan.net.tape import ArrayLike
from pan.problems.benchmark import ControlBenchmark, coordinates
from pan.problems.samples import SampleSet, grid_1d


class BoundaryControl1D(ControlBenchmark):
    """
    Example:

    ::

        problem = BoundaryControl1D()
        print(problem.a_star, problem.b_star)  # 2.0 5.0
    """

    name = 'poisson1d-boundary'
    spatial_dim = 1
    output_dim = 1

    def __init__(self, a: float = -10.0, b_slope: float = 65.0, amplitude: float = 8 * math.pi ** 2,
                 rho: float = 2.0):
        if not rho > 0:
            raise ContractViolationError(f'rho must be positive, got {rho}')
        self.a = a
        self.b_slope = b_slope
        self.amplitude = amplitude
        self.rho = rho

    @property
    def a_star(self) -> float:
        rho = self.rho
        return self.a / (1 + 2 * rho) + 2 * rho * self.b_slope / ((1 + 2 * rho) * (1 + 6 * rho))

    @property
    def b_star(self) -> float:
        return self.b_slope / (1 + 6 * self.rho)

    @property
    def parameters(self) -> dict:
        return {'a': self.a, 'b_slope': self.b_slope, 'amplitude': self.amplitude, 'rho': self.rho}

    def _wave(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude / (4 * math.pi ** 2) * np.sin(2 * math.pi * x)

    def desired_state(self, coords: typing.Any) -> np.ndarray:
        x = coordinates(coords, 1)[:, 0]
        return self._wave(x) + self.b_slope * x + self.a

    def analytic_solution(self, coords: typing.Any) -> np.ndarray:
        x = coordinates(coords, 1)[:, 0]
        return self._wave(x) + self.b_star * x + self.a_star

    def analytic_gradient(self, coords: typing.Any) -> np.ndarray:
        x = coordinates(coords, 1)[:, 0]
        slope = self.amplitude / (2 * math.pi) * np.cos(2 * math.pi * x) + self.b_star
        return slope.reshape(-1, 1)

    def analytic_laplacian(self, coords: typing.Any) -> np.ndarray:
        x = coordinates(coords, 1)[:, 0]
        return -self.amplitude * np.sin(2 * math.pi * x)

    def analytic_boundary_control(self) -> typing.Tuple[float, float]:
        """
        The optimal boundary values ``(u(0), u(1)) = (a*, a* + b*)``.
        """
        return self.a_star, self.a_star + self.b_star

    def boundary_objective(self, u0: float, u1: float) -> float:
        """
        ``J`` of the exact Poisson solution with boundary values ``(u0, u1)``.

        That solution differs from ``u_d`` by the affine function ``c0 + c1·x``
        with ``c0 = u0 − a`` and ``c1 = u1 − u0 − b``, so
        ``J = ½(c0² + c0c1 + c1²/3) + (ρ/2)(u0² + u1²)``.
        """
        c0 = u0 - self.a
        c1 = u1 - u0 - self.b_slope
        return 0.5 * (c0 * c0 + c0 * c1 + c1 * c1 / 3.0) + 0.5 * self.rho * (u0 * u0 + u1 * u1)

    def pde_residual(self, coords: typing.Any, value: ArrayLike, hessian_diagonal: ArrayLike,
                     control_value: typing.Optional[ArrayLike] = None) -> ArrayLike:
        x = coordinates(coords, 1)[:, 0]
        return hessian_diagonal[:, 0] + self.amplitude * np.sin(2 * math.pi * x)

    def objective(self, samples: SampleSet, interior_output: ArrayLike, boundary_output: ArrayLike) -> ArrayLike:
        misfit = interior_output[:, 0] - self.desired_state(samples.interior)
        ends = boundary_output[:, 0]
        return 0.5 * self.rho * (ends * ends).sum() + 0.5 * (misfit * misfit).mean()

    def boundary_residual(self, samples: SampleSet, boundary_output: ArrayLike) -> typing.Optional[ArrayLike]:
        return None

    def sample_grid(self, n: int, n_boundary: int = 2) -> SampleSet:
        return grid_1d(n)
