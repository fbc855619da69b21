import typing
from dataclasses import dataclass

import numpy as np

from pan.exceptions import ContractViolationError


@dataclass(frozen=True, eq=False)
class SampleSet:
    """
    Fixed collocation points shared by every loss term.
    """

    interior: np.ndarray
    """
    ``samples × spatial_dim`` points where the objective and PDE residual are evaluated.
    """

    boundary: np.ndarray
    """
    ``samples × spatial_dim`` points on the domain boundary.
    """

    n: int
    """
    Points per axis of the interior grid.
    """

    n_boundary: int

    initial: typing.Optional[np.ndarray] = None
    """
    Points on the initial time slice; ``None`` for stationary problems.
    """

    @property
    def spatial_dim(self) -> int:
        return self.interior.shape[1]

    def __repr__(self):
        return (f'SampleSet(interior={self.interior.shape[0]}, boundary={self.boundary.shape[0]}, '
                f'dim={self.spatial_dim})')


def grid_1d(n: int) -> SampleSet:
    """
    ``n`` equispaced points ``m/(n−1)`` on ``[0, 1]``, endpoints included.
    The boundary set is ``{0, 1}``.
    """
    if n < 2:
        raise ContractViolationError(f'need at least 2 points, got {n}')
    interior = np.linspace(0.0, 1.0, n).reshape(-1, 1)
    return SampleSet(interior, np.array([[0.0], [1.0]]), n, 2)


def grid_2d(n: int, n_boundary: int) -> SampleSet:
    """
    ``n × n`` interior points ``(m/(n+1), k/(n+1))`` for ``m, k = 1..n`` and
    ``n_boundary / 4`` equispaced points on every edge of the unit square,
    corners excluded.

    Example:

    ::

        samples = grid_2d(16, 32)
        print(samples.interior.shape, samples.boundary.shape)  # (256, 2) (32, 2)
    """
    if n < 2:
        raise ContractViolationError(f'need at least 2 points per axis, got {n}')
    if n_boundary < 4 or n_boundary % 4:
        raise ContractViolationError(f'boundary point count must be a positive multiple of 4, got {n_boundary}')

    axis = np.arange(1, n + 1) / (n + 1)
    X, Y = np.meshgrid(axis, axis, indexing='ij')
    interior = np.column_stack([X.ravel(), Y.ravel()])

    per_edge = n_boundary // 4
    t = np.arange(1, per_edge + 1) / (per_edge + 1)
    zeros, ones = np.zeros(per_edge), np.ones(per_edge)
    boundary = np.concatenate([
        np.column_stack([t, zeros]),
        np.column_stack([t, ones]),
        np.column_stack([zeros, t]),
        np.column_stack([ones, t]),
    ])
    return SampleSet(interior, boundary, n, n_boundary)
