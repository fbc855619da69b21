import typing

import numpy as np

from pan.exceptions import ConfigError
from pan.net.mlp import Activation, MlpSpec

CHECKPOINT_VERSION = 1


def save_checkpoint(path: str, spec: MlpSpec, params: np.ndarray, best_value: typing.Optional[float] = None):
    """
    Writes a flat parameter vector with the network header as a ``.npz`` archive.

    :param path: Target file; numpy appends ``.npz`` when missing.
    :param spec: Network shape.
    :param params: Flat parameters.
    :param best_value: Tracked loss the parameters achieved, ``nan`` when unknown.
    """
    np.savez(path,
             version=np.int64(CHECKPOINT_VERSION),
             params=np.asarray(params, dtype=np.float64),
             input_dim=np.int64(spec.input_dim),
             output_dim=np.int64(spec.output_dim),
             depth=np.int64(spec.depth),
             width=np.int64(spec.width),
             activation=np.str_(spec.activation.value),
             best_value=np.float64(np.nan if best_value is None else best_value))


def load_checkpoint(path: str) -> typing.Tuple[MlpSpec, np.ndarray, typing.Optional[float]]:
    """
    Reads a checkpoint written by :py:func:`save_checkpoint`.

    :return: ``(spec, params, best_value)``.
    """
    with np.load(path) as archive:
        version = int(archive['version'])
        if version != CHECKPOINT_VERSION:
            raise ConfigError(f'{path}: unsupported checkpoint version {version}')
        spec = MlpSpec(input_dim=int(archive['input_dim']),
                       output_dim=int(archive['output_dim']),
                       depth=int(archive['depth']),
                       width=int(archive['width']),
                       activation=Activation(str(archive['activation'])))
        params = archive['params'].copy()
        best_value = float(archive['best_value'])
    if params.shape != (spec.param_count,):
        raise ConfigError(f'{path}: {params.shape[0]} parameters do not fit {spec}')
    return spec, params, None if np.isnan(best_value) else best_value
