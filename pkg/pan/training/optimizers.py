"""
First-order update rules on flat parameter vectors.

Optimizers are stateless objects; whatever they need to remember between
steps travels in the returned state so a training state can be copied or
rolled back as a whole.
"""
import typing

import numpy as np

from pan.training.config import OptimizerKind


class AdamState(typing.NamedTuple):
    first_moment: np.ndarray
    second_moment: np.ndarray
    steps: int


class Sgd:
    """
    Plain gradient steps ``θ ← θ − η∇L``.
    """

    def init(self, params: np.ndarray) -> None:
        return None

    def step(self, params: np.ndarray, gradient: np.ndarray, lr: float, state: None) \
            -> typing.Tuple[np.ndarray, None]:
        return params - lr * gradient, None

    def __repr__(self):
        return 'Sgd()'


class Adam:
    """
    Adam with bias correction.
    """

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    def init(self, params: np.ndarray) -> AdamState:
        return AdamState(np.zeros_like(params), np.zeros_like(params), 0)

    def step(self, params: np.ndarray, gradient: np.ndarray, lr: float, state: AdamState) \
            -> typing.Tuple[np.ndarray, AdamState]:
        steps = state.steps + 1
        m = self.beta1 * state.first_moment + (1 - self.beta1) * gradient
        v = self.beta2 * state.second_moment + (1 - self.beta2) * gradient * gradient
        m_hat = m / (1 - self.beta1 ** steps)
        v_hat = v / (1 - self.beta2 ** steps)
        return params - lr * m_hat / (np.sqrt(v_hat) + self.eps), AdamState(m, v, steps)

    def __repr__(self):
        return f'Adam(beta1={self.beta1}, beta2={self.beta2}, eps={self.eps})'


def make_optimizer(kind: OptimizerKind) -> typing.Union[Sgd, Adam]:
    return Adam() if OptimizerKind(kind) == OptimizerKind.ADAM else Sgd()
