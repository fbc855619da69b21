"""
A small reverse-mode automatic differentiation tape over numpy arrays.

Every operation on a :py:class:`Tensor` records its parents and a closure
that maps the output gradient to one gradient per parent. Calling
:py:meth:`Tensor.backward` on a scalar walks the recorded graph in reverse
topological order.

Example:

::

    w = Tensor([1.0, 2.0], requires_grad=True)
    loss = (w * w).sum()
    loss.backward()
    print(w.grad)  # [2. 4.]
"""
import typing

import numpy as np

ArrayLike = typing.Union['Tensor', np.ndarray, float]


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """
    An array that remembers how it was computed.

    Nodes built only from constants carry no parents, so graphs stay as
    small as the parameter dependence allows.
    """

    __array_ufunc__ = None

    def __init__(self, data: typing.Any, requires_grad: bool = False,
                 parents: typing.Tuple['Tensor', ...] = (),
                 backward: typing.Optional[typing.Callable[[np.ndarray], tuple]] = None,
                 op: str = ''):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: typing.Optional[np.ndarray] = None
        self._parents = parents
        self._backward = backward
        self._op = op

    @staticmethod
    def lift(value: ArrayLike) -> 'Tensor':
        return value if isinstance(value, Tensor) else Tensor(value)

    @staticmethod
    def _node(data: np.ndarray, parents: typing.Tuple['Tensor', ...], backward, op: str) -> 'Tensor':
        if not any(p.requires_grad for p in parents):
            return Tensor(data)
        return Tensor(data, True, parents, backward, op)

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def T(self) -> 'Tensor':
        return self._node(self.data.T, (self,), lambda g: (g.T,), 'T')

    def __add__(self, other: ArrayLike) -> 'Tensor':
        other = Tensor.lift(other)
        return self._node(self.data + other.data, (self, other),
                          lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)), '+')

    def __radd__(self, other: ArrayLike) -> 'Tensor':
        return Tensor.lift(other) + self

    def __neg__(self) -> 'Tensor':
        return self._node(-self.data, (self,), lambda g: (-g,), 'neg')

    def __sub__(self, other: ArrayLike) -> 'Tensor':
        other = Tensor.lift(other)
        return self._node(self.data - other.data, (self, other),
                          lambda g: (_unbroadcast(g, self.shape), _unbroadcast(-g, other.shape)), '-')

    def __rsub__(self, other: ArrayLike) -> 'Tensor':
        return Tensor.lift(other) - self

    def __mul__(self, other: ArrayLike) -> 'Tensor':
        other = Tensor.lift(other)
        return self._node(self.data * other.data, (self, other),
                          lambda g: (_unbroadcast(g * other.data, self.shape),
                                     _unbroadcast(g * self.data, other.shape)), '*')

    def __rmul__(self, other: ArrayLike) -> 'Tensor':
        return Tensor.lift(other) * self

    def __truediv__(self, other: ArrayLike) -> 'Tensor':
        other = Tensor.lift(other)
        return self._node(self.data / other.data, (self, other),
                          lambda g: (_unbroadcast(g / other.data, self.shape),
                                     _unbroadcast(-g * self.data / other.data ** 2, other.shape)), '/')

    def __rtruediv__(self, other: ArrayLike) -> 'Tensor':
        return Tensor.lift(other) / self

    def __pow__(self, power: float) -> 'Tensor':
        return self._node(self.data ** power, (self,),
                          lambda g: (g * power * self.data ** (power - 1),), '**')

    def __matmul__(self, other: ArrayLike) -> 'Tensor':
        other = Tensor.lift(other)
        return self._node(self.data @ other.data, (self, other),
                          lambda g: (g @ other.data.T, self.data.T @ g), '@')

    def __rmatmul__(self, other: ArrayLike) -> 'Tensor':
        return Tensor.lift(other) @ self

    def __getitem__(self, index) -> 'Tensor':
        def backward(g):
            full = np.zeros_like(self.data)
            np.add.at(full, index, g)
            return full,
        return self._node(self.data[index], (self,), backward, '[]')

    def reshape(self, *shape) -> 'Tensor':
        return self._node(self.data.reshape(*shape), (self,), lambda g: (g.reshape(self.shape),), 'reshape')

    def tanh(self) -> 'Tensor':
        t = np.tanh(self.data)
        return self._node(t, (self,), lambda g: (g * (1.0 - t * t),), 'tanh')

    def sum(self, axis: typing.Optional[int] = None) -> 'Tensor':
        def backward(g):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, self.shape).copy(),
        return self._node(self.data.sum(axis=axis), (self,), backward, 'sum')

    def mean(self, axis: typing.Optional[int] = None) -> 'Tensor':
        count = self.data.size if axis is None else self.shape[axis]
        return self.sum(axis) / count

    def backward(self, grad: typing.Optional[np.ndarray] = None):
        """
        Accumulates ``∂self/∂leaf`` into ``leaf.grad`` for every leaf that requires it.

        :param grad: Seed gradient, ``1`` for a scalar when omitted.
        """
        if grad is None:
            if self.data.size != 1:
                raise ValueError('backward() without a seed needs a scalar tensor')
            grad = np.ones_like(self.data)

        order, visited, stack = [], set(), [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

        grads = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, parent_grad in zip(node._parents, node._backward(g)):
                if not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f'Tensor({self.data!r}, requires_grad={self.requires_grad})'


def value_of(x: ArrayLike) -> np.ndarray:
    """
    The plain array behind ``x``.
    """
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def tanh(x: ArrayLike) -> ArrayLike:
    return x.tanh() if isinstance(x, Tensor) else np.tanh(x)


def stack(values: typing.Sequence[ArrayLike], axis: int = 0) -> ArrayLike:
    """
    ``numpy.stack`` that keeps the tape when any input is a :py:class:`Tensor`.
    """
    if not any(isinstance(v, Tensor) for v in values):
        return np.stack(values, axis=axis)
    tensors = [Tensor.lift(v) for v in values]

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor._node(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), backward, 'stack')
