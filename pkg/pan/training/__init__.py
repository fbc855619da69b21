"""
Loss assembly and the joint solver/discriminator training loop.
"""
from pan.training.config import Mode, NetworkConfig, OptimizerKind, PenaltyWeights, TrainerConfig, load_config
from pan.training.losses import (
    LossBreakdown,
    discriminator_loss,
    penalty_loss,
    penalty_loss_gradient,
    solver_loss,
    solver_loss_gradient
)
from pan.training.optimizers import Adam, AdamState, Sgd, make_optimizer
from pan.training.schedule import ScheduleConfig, SchedulerState, lr_schedule_update
from pan.training.trainer import (
    NetworkState,
    TrainResult,
    TrainState,
    evaluate_network,
    initial_state,
    network_specs,
    plateau_epoch,
    train,
    train_epoch
)
