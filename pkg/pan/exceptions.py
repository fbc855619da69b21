import typing


class PanError(Exception):
    """
    Base class for every error raised by the library.
    """


class ContractViolationError(PanError, ValueError):
    """
    An operation was called with arguments that break its preconditions,
    for example vectors whose dimensions do not match the problem.
    """


class SingularSystemError(PanError):
    """
    A linear system that should be invertible is numerically singular.
    """

    smallest_singular_value: float
    """
    Smallest singular value relative to the largest one.
    """

    def __init__(self, message: str, smallest_singular_value: float):
        super().__init__(f'{message} (relative smallest singular value {smallest_singular_value:.3e})')
        self.smallest_singular_value = smallest_singular_value


class DomainError(PanError, ValueError):
    """
    A quantity was requested outside the region where it is defined.
    """


class EmptyBandError(DomainError):
    """
    The admissible objective band has no interior.
    """


class ConditionFailedError(PanError):
    """
    The sufficient condition a bound relies on does not hold.
    """


class UnsupportedOperationError(PanError):
    """
    The benchmark has no meaningful answer for this operation.
    """


class NonFiniteError(PanError, ArithmeticError):
    """
    A network output or loss became NaN or infinite.
    """

    sample_index: typing.Optional[int]
    """
    Index of the first offending sample, ``None`` when the value is a reduction.
    """

    def __init__(self, message: str, sample_index: typing.Optional[int] = None):
        if sample_index is not None:
            message = f'{message} at sample {sample_index}'
        super().__init__(message)
        self.sample_index = sample_index


class DivergenceError(PanError):
    """
    An iterative procedure produced non-finite values.

    ``last_good`` holds whatever the procedure could still vouch for:
    the last finite iterate or the untouched training state.
    """

    def __init__(self, message: str, last_good: typing.Any = None, epoch: typing.Optional[int] = None):
        if epoch is not None:
            message = f'{message} (epoch {epoch})'
        super().__init__(message)
        self.last_good = last_good
        self.epoch = epoch


class ConfigError(PanError, ValueError):
    """
    A configuration file could not be parsed or violates the schema.
    """


class OutputExistsError(PanError):
    """
    The output directory already holds results and ``--force`` was not given.
    """


class NonSmoothGradientWarning(RuntimeWarning):
    """
    Issued when a gradient is requested exactly on a kink of the functional.
    """


class WeightOrderingWarning(UserWarning):
    """
    Issued when solver penalty weights are smaller than the discriminator's.
    """
