"""
Benchmark optimal control problems with manufactured analytic optima.
"""
import typing

from pan.exceptions import ConfigError
from pan.problems.allen_cahn import DistributedControl2DAllenCahn
from pan.problems.benchmark import ControlBenchmark, laplacian_of
from pan.problems.poisson1d import BoundaryControl1D
from pan.problems.poisson2d import DistributedControl2DPoisson
from pan.problems.samples import SampleSet, grid_1d, grid_2d

PROBLEMS: typing.Dict[str, typing.Type[ControlBenchmark]] = {
    BoundaryControl1D.name: BoundaryControl1D,
    DistributedControl2DPoisson.name: DistributedControl2DPoisson,
    DistributedControl2DAllenCahn.name: DistributedControl2DAllenCahn,
}
"""
Benchmarks by the name used in run configurations.
"""


def get_problem(name: str, **parameters) -> ControlBenchmark:
    """
    Builds a benchmark by name.

    Example:

    ::

        problem = get_problem('allen-cahn-2d', rho=0.0)

    :param name: One of :py:data:`PROBLEMS`.
    :param parameters: Constructor overrides.
    :return: The benchmark.
    """
    try:
        cls = PROBLEMS[name]
    except KeyError:
        raise ConfigError(f'unknown problem {name!r}, expected one of {sorted(PROBLEMS)}') from None
    try:
        return cls(**parameters)
    except TypeError as e:
        raise ConfigError(f'bad parameters for {name}: {e}') from e
