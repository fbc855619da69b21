import logging
import math
import typing

log = logging.getLogger(__name__)


class SchedulerState(typing.NamedTuple):
    """
    Plateau scheduler of one network.
    """

    learning_rate: float
    best_loss: float = math.inf
    epochs_since_improvement: int = 0


class ScheduleConfig(typing.NamedTuple):
    patience: int
    min_learning_rate: float
    start_epoch: int = 0


def lr_schedule_update(state: SchedulerState, current_loss: float, epoch: int,
                       config: ScheduleConfig) -> SchedulerState:
    """
    Halves the learning rate after ``patience`` epochs without a strict
    decrease of the tracked loss.

    The rate is halved only from ``start_epoch`` on and only while the
    halved rate stays at or above ``min_learning_rate``; the counter restarts
    after every halving.

    Example:

    ::

        state = SchedulerState(1e-3)
        for epoch in range(10):
            state = lr_schedule_update(state, 1.0, epoch, ScheduleConfig(3, 1e-4))
        print(state.learning_rate)  # 1.25e-4

    :param state: Current scheduler state.
    :param current_loss: Loss of this epoch.
    :param epoch: Index of this epoch.
    :param config: Patience, floor and start epoch.
    :return: The updated state.
    """
    if current_loss < state.best_loss:
        best, waited = current_loss, 0
    else:
        best, waited = state.best_loss, state.epochs_since_improvement + 1

    lr = state.learning_rate
    if waited >= config.patience and epoch >= config.start_epoch and lr / 2 >= config.min_learning_rate:
        lr, waited = lr / 2, 0
        log.debug(f'epoch {epoch}: learning rate halved to {lr:g}')
    return SchedulerState(lr, best, waited)
