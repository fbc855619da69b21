"""
Hyper-dual numbers ``a + b ε1 + c ε2 + d ε1ε2`` with ``ε1² = ε2² = 0``.

Seeding ``ε1`` and ``ε2`` with the same unit direction makes the ``ε1ε2``
component of ``f(x)`` the exact pure second derivative along that direction.
Components may be numpy arrays or :py:class:`pan.net.tape.Tensor` nodes, so
the same arithmetic evaluates a network and records it for the reverse pass.
"""
import typing

import numpy as np

from pan.net.tape import ArrayLike, tanh


class HyperDual:
    """
    When ``eps2 is eps1`` the number describes a single direction and every
    rule computes the shared part once.
    """

    __array_ufunc__ = None

    def __init__(self, real: ArrayLike, eps1: ArrayLike, eps2: ArrayLike, eps12: ArrayLike):
        self.real = real
        self.eps1 = eps1
        self.eps2 = eps2
        self.eps12 = eps12

    @classmethod
    def seed(cls, x: np.ndarray, direction: np.ndarray) -> 'HyperDual':
        """
        Lifts points ``x`` with both perturbations along ``direction``.

        :param x: Batch of points, ``samples × input_dim``.
        :param direction: Unit vector of length ``input_dim``.
        :return: The lifted batch.
        """
        eps = np.broadcast_to(direction, x.shape).astype(np.float64)
        return cls(x, eps, eps, np.zeros_like(x))

    @property
    def diagonal(self) -> bool:
        return self.eps2 is self.eps1

    def _with(self, real, eps1, eps2, eps12) -> 'HyperDual':
        return HyperDual(real, eps1, eps1 if self.diagonal else eps2, eps12)

    def __add__(self, other: typing.Union['HyperDual', ArrayLike]) -> 'HyperDual':
        if isinstance(other, HyperDual):
            eps1 = self.eps1 + other.eps1
            eps2 = eps1 if self.diagonal and other.diagonal else self.eps2 + other.eps2
            return HyperDual(self.real + other.real, eps1, eps2, self.eps12 + other.eps12)
        return HyperDual(self.real + other, self.eps1, self.eps2, self.eps12)

    def __radd__(self, other: ArrayLike) -> 'HyperDual':
        return self + other

    def __neg__(self) -> 'HyperDual':
        return self._with(-self.real, -self.eps1, None if self.diagonal else -self.eps2, -self.eps12)

    def __sub__(self, other: typing.Union['HyperDual', ArrayLike]) -> 'HyperDual':
        return self + (-other)

    def __mul__(self, other: typing.Union['HyperDual', ArrayLike]) -> 'HyperDual':
        if isinstance(other, HyperDual):
            if self.diagonal and other.diagonal:
                eps1 = self.real * other.eps1 + self.eps1 * other.real
                return HyperDual(self.real * other.real, eps1, eps1,
                                 self.real * other.eps12 + 2.0 * self.eps1 * other.eps1 + self.eps12 * other.real)
            return HyperDual(self.real * other.real,
                             self.real * other.eps1 + self.eps1 * other.real,
                             self.real * other.eps2 + self.eps2 * other.real,
                             self.real * other.eps12 + self.eps1 * other.eps2
                             + self.eps2 * other.eps1 + self.eps12 * other.real)
        eps1 = self.eps1 * other
        return self._with(self.real * other, eps1, None if self.diagonal else self.eps2 * other,
                          self.eps12 * other)

    def __rmul__(self, other: ArrayLike) -> 'HyperDual':
        return self * other

    def linear(self, weight: ArrayLike, bias: ArrayLike) -> 'HyperDual':
        """
        Applies ``x ↦ x Wᵀ + b`` row-wise; the perturbations see only ``Wᵀ``.
        """
        weight_t = weight.T
        eps1 = self.eps1 @ weight_t
        return self._with(self.real @ weight_t + bias, eps1,
                          None if self.diagonal else self.eps2 @ weight_t, self.eps12 @ weight_t)

    def apply(self, f: ArrayLike, df: ArrayLike, d2f: ArrayLike) -> 'HyperDual':
        """
        Applies an elementwise function given its value and first two derivatives at ``real``.
        """
        eps1 = df * self.eps1
        if self.diagonal:
            return HyperDual(f, eps1, eps1, d2f * self.eps1 * self.eps1 + df * self.eps12)
        return HyperDual(f, eps1, df * self.eps2, d2f * self.eps1 * self.eps2 + df * self.eps12)

    def tanh(self) -> 'HyperDual':
        t = tanh(self.real)
        dt = 1.0 - t * t
        return self.apply(t, dt, -2.0 * t * dt)

    def __repr__(self):
        return f'HyperDual({self.real!r}, {self.eps1!r}, {self.eps2!r}, {self.eps12!r})'


def second_derivative(f: typing.Callable[[HyperDual], HyperDual], x: float) -> typing.Tuple[float, float, float]:
    """
    Value, first and second derivative of a scalar function at ``x``.

    Example:

    ::

        second_derivative(lambda h: h.tanh(), 1.0)  # (0.7616, 0.4200, -0.6397)
    """
    out = f(HyperDual.seed(np.array([[x]]), np.array([1.0])))
    return float(out.real[0, 0]), float(out.eps1[0, 0]), float(out.eps12[0, 0])
