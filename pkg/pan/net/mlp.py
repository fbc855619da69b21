"""
Fully connected networks over a flat parameter vector.

The parameter layout is, layer after layer, the weight matrix
(``fan_out × fan_in``, row-major) followed by the bias. Hidden layers apply
the activation, the output layer is linear.
"""
import logging
import typing
from dataclasses import dataclass
from enum import Enum

import numpy as np

from pan.exceptions import ContractViolationError, NonFiniteError
from pan.net.hyperdual import HyperDual
from pan.net.tape import ArrayLike, Tensor, stack, tanh, value_of

log = logging.getLogger(__name__)


class Activation(Enum):
    """
    Activations available to hidden layers. Residuals need a further
    derivative of ``u''`` during training, so only smooth ones are offered.
    """
    TANH = 'tanh'


@dataclass(frozen=True)
class MlpSpec:
    """
    Shape of a network.

    Example:

    ::

        spec = MlpSpec(input_dim=2, output_dim=2, depth=4, width=60)
        print(spec.param_count)
    """

    input_dim: int
    output_dim: int

    depth: int
    """
    Number of hidden layers.
    """

    width: int
    """
    Neurons per hidden layer.
    """

    activation: Activation = Activation.TANH

    def __post_init__(self):
        for name in ('input_dim', 'output_dim', 'depth', 'width'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ContractViolationError(f'{name} must be a positive integer, got {value}')
        object.__setattr__(self, 'activation', Activation(self.activation))

    @property
    def layer_shapes(self) -> typing.List[typing.Tuple[int, int]]:
        """
        ``(fan_out, fan_in)`` of every layer in order.
        """
        sizes = [self.input_dim] + [self.width] * self.depth + [self.output_dim]
        return [(fan_out, fan_in) for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]

    @property
    def param_count(self) -> int:
        return sum(fan_out * fan_in + fan_out for fan_out, fan_in in self.layer_shapes)

    def to_dict(self) -> dict:
        return {'input_dim': self.input_dim, 'output_dim': self.output_dim, 'depth': self.depth,
                'width': self.width, 'activation': self.activation.value}


@dataclass(frozen=True)
class SecondOrderEval:
    """
    Network outputs with their input derivatives on a batch.

    Each field is an array, or a :py:class:`pan.net.tape.Tensor` when the
    network records its computation.
    """

    value: ArrayLike
    """
    ``samples × output_dim``.
    """

    input_gradient: ArrayLike
    """
    ``samples × output_dim × input_dim``.
    """

    input_hessian_diagonal: ArrayLike
    """
    ``samples × output_dim × input_dim``; ``∂²u/∂x_i²`` in the last axis.
    """

    def laplacian(self, output: int = 0) -> ArrayLike:
        """
        Sum of the pure second derivatives of one output, ``samples`` long.
        """
        hessian = self.input_hessian_diagonal
        total = hessian[:, output, 0]
        for i in range(1, hessian.shape[2]):
            total = total + hessian[:, output, i]
        return total


def init_params(spec: MlpSpec, seed: int) -> np.ndarray:
    """
    Glorot-uniform weights in ``±√(6 / (fan_in + fan_out))`` and zero biases.

    :param spec: Network shape.
    :param seed: Seed of the generator, same seed gives the same vector.
    :return: Flat parameter vector.
    """
    rng = np.random.default_rng(seed)
    chunks = []
    for fan_out, fan_in in spec.layer_shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-limit, limit, size=fan_out * fan_in))
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)


def unflatten(spec: MlpSpec, params: ArrayLike) -> typing.List[typing.Tuple[ArrayLike, ArrayLike]]:
    """
    Splits a flat vector into ``(W, b)`` pairs, keeping the tape for tensors.
    """
    if params.shape != (spec.param_count,):
        raise ContractViolationError(f'expected {spec.param_count} parameters, got shape {params.shape}')
    layers, offset = [], 0
    for fan_out, fan_in in spec.layer_shapes:
        weight = params[offset:offset + fan_out * fan_in].reshape(fan_out, fan_in)
        offset += fan_out * fan_in
        bias = params[offset:offset + fan_out]
        offset += fan_out
        layers.append((weight, bias))
    return layers


def _as_batch(spec: MlpSpec, x: typing.Any) -> typing.Tuple[np.ndarray, bool]:
    batch = np.asarray(x, dtype=np.float64)
    single = batch.ndim == 1
    batch = np.atleast_2d(batch)
    if batch.ndim != 2 or batch.shape[1] != spec.input_dim:
        raise ContractViolationError(f'expected inputs with {spec.input_dim} coordinates, got shape {np.shape(x)}')
    finite = np.isfinite(batch).all(axis=1)
    if not finite.all():
        raise NonFiniteError('non-finite network input', int(np.flatnonzero(~finite)[0]))
    return batch, single


def _check_finite(what: str, value: ArrayLike):
    data = value_of(value)
    finite = np.isfinite(data.reshape(data.shape[0], -1)).all(axis=1)
    if not finite.all():
        raise NonFiniteError(f'non-finite {what}', int(np.flatnonzero(~finite)[0]))


class MlpNet:
    """
    A network bound to one parameter vector.

    With ``track=True`` the parameters become a :py:class:`pan.net.tape.Tensor`
    leaf and every evaluation is recorded, so a scalar loss built from the
    outputs can be differentiated with :py:meth:`pan.net.tape.Tensor.backward`.
    """

    def __init__(self, spec: MlpSpec, params: np.ndarray, track: bool = False):
        self.spec = spec
        params = np.asarray(params, dtype=np.float64)
        self.params: ArrayLike = Tensor(params, requires_grad=True) if track else params
        self.layers = unflatten(spec, self.params)

    def _propagate(self, h):
        for weight, bias in self.layers[:-1]:
            h = h.linear(weight, bias).tanh() if isinstance(h, HyperDual) else tanh(h @ weight.T + bias)
        weight, bias = self.layers[-1]
        return h.linear(weight, bias) if isinstance(h, HyperDual) else h @ weight.T + bias

    def __call__(self, x: typing.Any) -> ArrayLike:
        """
        Outputs on a batch, ``samples × output_dim``.
        """
        batch, _ = _as_batch(self.spec, x)
        out = self._propagate(batch)
        _check_finite('network output', out)
        return out

    def second_order(self, x: typing.Any) -> SecondOrderEval:
        """
        Outputs with input gradients and pure second derivatives, one
        hyper-dual pass per input coordinate.
        """
        batch, _ = _as_batch(self.spec, x)
        value, gradients, curvatures = None, [], []
        for i in range(self.spec.input_dim):
            out = self._propagate(HyperDual.seed(batch, np.eye(self.spec.input_dim)[i]))
            if value is None:
                value = out.real
            gradients.append(out.eps1)
            curvatures.append(out.eps12)
        _check_finite('network output', value)
        hessian = stack(curvatures, axis=2)
        _check_finite('second derivative', hessian)
        return SecondOrderEval(value, stack(gradients, axis=2), hessian)

    def gradient(self) -> np.ndarray:
        """
        Accumulated gradient of the flat parameters after a reverse pass.
        """
        if not isinstance(self.params, Tensor) or self.params.grad is None:
            return np.zeros(self.spec.param_count)
        return self.params.grad


def forward(spec: MlpSpec, params: np.ndarray, x: typing.Any) -> np.ndarray:
    """
    Evaluates the network.

    :param spec: Network shape.
    :param params: Flat parameters.
    :param x: One point (``input_dim``) or a batch (``samples × input_dim``).
    :return: ``output_dim`` values per point, shaped like the input batch.
    """
    _, single = _as_batch(spec, x)
    out = MlpNet(spec, params)(x)
    return out[0] if single else out


def forward_second_order(spec: MlpSpec, params: np.ndarray, x: typing.Any) -> SecondOrderEval:
    """
    Evaluates the network together with ``∂u/∂x_i`` and ``∂²u/∂x_i²``.

    Example:

    ::

        spec = MlpSpec(1, 1, 1, 1)
        ev = forward_second_order(spec, np.array([1.0, 0.0, 1.0, 0.0]), [1.0])
        print(ev.input_hessian_diagonal)  # [[-0.6397]]

    :param spec: Network shape.
    :param params: Flat parameters.
    :param x: One point or a batch.
    :return: The evaluation; the sample axis is dropped for a single point.
    """
    _, single = _as_batch(spec, x)
    ev = MlpNet(spec, params).second_order(x)
    if single:
        return SecondOrderEval(ev.value[0], ev.input_gradient[0], ev.input_hessian_diagonal[0])
    return ev


def value_and_gradient(spec: MlpSpec, params: np.ndarray,
                       loss: typing.Callable[[MlpNet], Tensor]) -> typing.Tuple[float, np.ndarray]:
    """
    Runs ``loss`` on a recording network and differentiates it.

    :param spec: Network shape.
    :param params: Flat parameters.
    :param loss: Builds a scalar from the network, through
        :py:meth:`MlpNet.__call__` and :py:meth:`MlpNet.second_order`.
    :return: ``(loss value, gradient)``.
    """
    net = MlpNet(spec, params, track=True)
    value = Tensor.lift(loss(net))
    if not np.isfinite(value.data).all():
        raise NonFiniteError('non-finite loss')
    if value.requires_grad:
        value.backward()
    return float(value.data), net.gradient().copy()


def loss_gradient(spec: MlpSpec, params: np.ndarray, loss: typing.Callable[[MlpNet], Tensor]) -> np.ndarray:
    """
    Reverse-mode gradient of a scalar loss with respect to every parameter,
    including through second input derivatives.
    """
    return value_and_gradient(spec, params, loss)[1]
