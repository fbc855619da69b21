"""
Writing run artifacts: CSV tables, JSON documents and the run manifest.
"""
import datetime
import json
import logging
import os
import subprocess
import typing
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from pan.exceptions import OutputExistsError

log = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
"""
Seventeen significant digits round-trip every double.
"""


def write_csv(frame: pd.DataFrame, path: str):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    log.debug(f'wrote {len(frame)} rows to {path}')


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, float_precision='round_trip')


def _jsonable(value: typing.Any):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(data: dict, path: str):
    with open(path, 'w', newline='\n') as f:
        json.dump(_jsonable(data), f, indent=2, sort_keys=True)
        f.write('\n')


def prepare_output_dir(path: str, force: bool = False) -> str:
    """
    Creates the output directory.

    :param path: Directory to write into.
    :param force: Allow writing into a directory that already has files.
    :return: The path.
    """
    if os.path.isdir(path) and os.listdir(path) and not force:
        raise OutputExistsError(f'{path} is not empty, pass --force to overwrite')
    os.makedirs(path, exist_ok=True)
    return path


def version_string() -> str:
    """
    ``git describe`` of the working tree, or the package version outside a checkout.
    """
    from pan import __version__
    try:
        result = subprocess.run(['git', 'describe', '--always', '--dirty', '--tags'],
                                cwd=os.path.dirname(os.path.abspath(__file__)),
                                capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return __version__
    described = result.stdout.strip()
    return described if result.returncode == 0 and described else __version__


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')


@dataclass
class RunManifest:
    """
    Provenance of one command, written as ``manifest.json`` next to its outputs.
    """

    command: str
    output_dir: str
    config_path: typing.Optional[str] = None
    seed: typing.Optional[int] = None
    started: str = field(default_factory=_now)
    finished: typing.Optional[str] = None
    version: str = field(default_factory=version_string)
    outputs: typing.List[str] = field(default_factory=list)

    def finish(self):
        self.finished = _now()

    def write(self):
        write_json(asdict(self), os.path.join(self.output_dir, 'manifest.json'))
