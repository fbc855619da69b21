"""
Feedforward networks with exact input second derivatives (hyper-dual
forward passes) and parameter gradients (a recorded reverse pass).
"""
from pan.net.checkpoint import load_checkpoint, save_checkpoint
from pan.net.hyperdual import HyperDual, second_derivative
from pan.net.mlp import (
    Activation,
    MlpNet,
    MlpSpec,
    SecondOrderEval,
    forward,
    forward_second_order,
    init_params,
    loss_gradient,
    unflatten,
    value_and_gradient
)
from pan.net.tape import Tensor
