"""
Distributed control of the 2D Allen-Cahn equation on the unit square:
minimise ``½∫(u − u_d)² + (ρ/2)∫f²`` subject to
``−Δu + (u³ − u)/ε² = f``, ``u = 0`` on the boundary.

The analytic state is ``u = α s1 + β s2`` with ``s1 = sin(πx) sin(πy)`` and
``s2 = sin(2πx) sin(2πy)``. With the adjoint ``p = ρf`` the optimality
system gives ``u_d = u − Δp + (3u² − 1)p/ε²``, which expands to::

    u_d = u + ρΔ²u − (3ρ/ε²)u²Δu − (ρ/ε²)(6u|∇u|² − Δu)
            − (ρ/ε²)(Δu − (u³ − u)/ε²)(3u² − 1)

All derivatives of ``u`` are closed forms:
``Δu = −2π²α s1 − 8π²β s2`` and ``Δ²u = 4π⁴α s1 + 64π⁴β s2``.
"""
import math
import typing

import numpy as np

from pan.exceptions import ContractViolationError
from pan.net.tape import ArrayLike
from pan.problems.benchmark import ControlBenchmark, coordinates, laplacian_of
from pan.problems.poisson2d import distributed_objective
from pan.problems.samples import SampleSet, grid_2d

PI = math.pi


class DistributedControl2DAllenCahn(ControlBenchmark):
    name = 'allen-cahn-2d'
    spatial_dim = 2
    output_dim = 2

    def __init__(self, epsilon: float = 0.4, alpha: float = 0.45, beta: float = 0.55, rho: float = 1e-4):
        if not epsilon > 0:
            raise ContractViolationError(f'epsilon must be positive, got {epsilon}')
        if rho < 0:
            raise ContractViolationError(f'rho must be non-negative, got {rho}')
        self.epsilon = epsilon
        self.alpha = alpha
        self.beta = beta
        self.rho = rho

    @property
    def parameters(self) -> dict:
        return {'epsilon': self.epsilon, 'alpha': self.alpha, 'beta': self.beta, 'rho': self.rho}

    def _modes(self, coords: typing.Any) -> typing.Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        p = coordinates(coords, 2)
        return p[:, 0], p[:, 1], np.sin(PI * p[:, 0]) * np.sin(PI * p[:, 1]), \
            np.sin(2 * PI * p[:, 0]) * np.sin(2 * PI * p[:, 1])

    def analytic_solution(self, coords: typing.Any) -> np.ndarray:
        _, _, s1, s2 = self._modes(coords)
        return self.alpha * s1 + self.beta * s2

    def analytic_gradient(self, coords: typing.Any) -> np.ndarray:
        x, y, _, _ = self._modes(coords)
        a, b = self.alpha * PI, 2 * self.beta * PI
        ux = a * np.cos(PI * x) * np.sin(PI * y) + b * np.cos(2 * PI * x) * np.sin(2 * PI * y)
        uy = a * np.sin(PI * x) * np.cos(PI * y) + b * np.sin(2 * PI * x) * np.cos(2 * PI * y)
        return np.column_stack([ux, uy])

    def analytic_laplacian(self, coords: typing.Any) -> np.ndarray:
        _, _, s1, s2 = self._modes(coords)
        return -2 * PI ** 2 * self.alpha * s1 - 8 * PI ** 2 * self.beta * s2

    def analytic_bilaplacian(self, coords: typing.Any) -> np.ndarray:
        _, _, s1, s2 = self._modes(coords)
        return 4 * PI ** 4 * self.alpha * s1 + 64 * PI ** 4 * self.beta * s2

    def _reaction(self, u):
        return (u * u * u - u) / self.epsilon ** 2

    def analytic_control(self, coords: typing.Any) -> np.ndarray:
        u = self.analytic_solution(coords)
        return -self.analytic_laplacian(coords) + self._reaction(u)

    def desired_state(self, coords: typing.Any) -> np.ndarray:
        u = self.analytic_solution(coords)
        lap = self.analytic_laplacian(coords)
        grad_sq = (self.analytic_gradient(coords) ** 2).sum(axis=1)
        bilap = self.analytic_bilaplacian(coords)
        k = self.rho / self.epsilon ** 2
        return (u + self.rho * bilap
                - 3 * k * u * u * lap
                - k * (6 * u * grad_sq - lap)
                - k * (lap - self._reaction(u)) * (3 * u * u - 1))

    def pde_residual(self, coords: typing.Any, value: ArrayLike, hessian_diagonal: ArrayLike,
                     control_value: typing.Optional[ArrayLike] = None) -> ArrayLike:
        return laplacian_of(hessian_diagonal) - self._reaction(value) + control_value

    def objective(self, samples: SampleSet, interior_output: ArrayLike, boundary_output: ArrayLike) -> ArrayLike:
        return distributed_objective(self.rho, self.desired_state(samples.interior), interior_output)

    def sample_grid(self, n: int, n_boundary: int) -> SampleSet:
        return grid_2d(n, n_boundary)
