"""
Joint training of the solver and discriminator networks.

Each epoch first takes a step on the discriminator loss ``L^d``, then reads
the updated discriminator's objective ``J^d`` and takes a step on the
solver loss ``L^s``. After the warmup the discriminator's best weights are
tracked on ``L^d`` and the solver's on its objective ``J^s`` alone.
"""
import logging
import time
import typing
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from pan.exceptions import DivergenceError, NonFiniteError
from pan.net.mlp import MlpNet, MlpSpec, init_params
from pan.problems import ControlBenchmark, SampleSet, get_problem, grid_1d, grid_2d
from pan.training.config import Mode, TrainerConfig
from pan.training.losses import LossBreakdown, assemble, penalty_loss_gradient, solver_loss_gradient
from pan.training.optimizers import make_optimizer
from pan.training.schedule import ScheduleConfig, SchedulerState, lr_schedule_update

log = logging.getLogger(__name__)

PLATEAU_TOLERANCE = 0.05

DETERMINISM_NOTE = 'single-threaded loop, full-batch losses, fixed-order numpy reductions'


@dataclass
class NetworkState:
    """
    Parameters, optimizer memory, scheduler and best snapshot of one network.
    """

    params: np.ndarray
    optimizer_state: typing.Any
    schedule: SchedulerState
    best_params: typing.Optional[np.ndarray] = None
    best_value: float = np.inf


@dataclass
class TrainState:
    """
    Everything that changes during training.

    :py:func:`train_epoch` commits a new epoch only after every loss of that
    epoch was finite, so a state handed back by
    :py:class:`pan.exceptions.DivergenceError` is the last good one.
    """

    solver: NetworkState
    discriminator: typing.Optional[NetworkState] = None
    epoch: int = 0
    history: typing.List[dict] = field(default_factory=list)

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.history)


def network_specs(config: TrainerConfig, problem: ControlBenchmark) -> typing.Tuple[MlpSpec, typing.Optional[MlpSpec]]:
    """
    Solver and discriminator shapes; the discriminator is ``None`` in penalty mode.
    """
    def spec(network):
        return MlpSpec(problem.spatial_dim, problem.output_dim, network.depth, network.width)
    return spec(config.solver), None if config.discriminator is None else spec(config.discriminator)


def initial_state(config: TrainerConfig, spec_s: MlpSpec, spec_d: typing.Optional[MlpSpec],
                  discriminator_seed: typing.Optional[int] = None) -> TrainState:
    """
    Glorot-initialised networks; the discriminator uses ``seed + 1`` unless told otherwise.
    """
    optimizer = make_optimizer(config.optimizer)

    def network(spec, seed, lr):
        params = init_params(spec, seed)
        return NetworkState(params, optimizer.init(params), SchedulerState(lr))

    solver = network(spec_s, config.seed, config.solver.learning_rate)
    discriminator = None
    if config.mode == Mode.PAN:
        seed = config.seed + 1 if discriminator_seed is None else discriminator_seed
        discriminator = network(spec_d, seed, config.discriminator.learning_rate)
    return TrainState(solver, discriminator)


def _schedule_config(config: TrainerConfig) -> ScheduleConfig:
    return ScheduleConfig(config.patience, config.min_learning_rate, config.schedule_start_epoch)


def _check_params(params: np.ndarray, who: str, state: TrainState):
    if not np.all(np.isfinite(params)):
        raise DivergenceError(f'{who} parameters became non-finite', last_good=state, epoch=state.epoch)


def train_epoch(state: TrainState, config: TrainerConfig, problem: ControlBenchmark, spec_s: MlpSpec,
                spec_d: typing.Optional[MlpSpec], samples: SampleSet) -> TrainState:
    """
    Runs one epoch and commits it into ``state``.

    :param state: Current state, updated in place.
    :param config: Run configuration.
    :param problem: The benchmark.
    :param spec_s: Solver shape.
    :param spec_d: Discriminator shape, ``None`` in penalty mode.
    :param samples: Collocation points shared by both networks.
    :return: The same state object, one epoch further.
    """
    epoch = state.epoch
    optimizer = make_optimizer(config.optimizer)
    schedule = _schedule_config(config)
    tracking = epoch >= config.warmup_epochs
    row = {'epoch': epoch}

    try:
        new_d = None
        d_objective = None
        if state.discriminator is not None:
            d = state.discriminator
            d_loss, d_grad = penalty_loss_gradient(problem, spec_d, d.params, samples, config.discriminator.weights)
            frozen = config.freeze_discriminator_after is not None and epoch >= config.freeze_discriminator_after
            if frozen:
                d_params, d_opt = d.params, d.optimizer_state
            else:
                d_params, d_opt = optimizer.step(d.params, d_grad, d.schedule.learning_rate, d.optimizer_state)
            _check_params(d_params, 'discriminator', state)

            best_params, best_value = d.best_params, d.best_value
            if tracking and d_loss.total < d.best_value:
                best_params, best_value = d.params, d_loss.total
            new_d = NetworkState(d_params, d_opt, lr_schedule_update(d.schedule, d_loss.total, epoch, schedule),
                                 best_params, best_value)

            _, updated = assemble(problem, MlpNet(spec_d, d_params), samples, config.discriminator.weights)
            d_objective = updated.objective
            row.update(d_loss.to_dict('discriminator_'))
            row['discriminator_lr'] = d.schedule.learning_rate

        s = state.solver
        if d_objective is None:
            s_loss, s_grad = penalty_loss_gradient(problem, spec_s, s.params, samples, config.solver.weights)
            tracked = s_loss.total
        else:
            s_loss, s_grad = solver_loss_gradient(problem, spec_s, s.params, d_objective, samples,
                                                  config.solver.weights, config.omega, config.one_sided)
            tracked = s_loss.objective
        s_params, s_opt = optimizer.step(s.params, s_grad, s.schedule.learning_rate, s.optimizer_state)
        _check_params(s_params, 'solver', state)
    except NonFiniteError as e:
        raise DivergenceError(str(e), last_good=state, epoch=epoch) from e

    best_params, best_value = s.best_params, s.best_value
    if tracking and tracked < s.best_value:
        best_params, best_value = s.params, tracked
    new_s = NetworkState(s_params, s_opt, lr_schedule_update(s.schedule, s_loss.total, epoch, schedule),
                         best_params, best_value)
    row.update(s_loss.to_dict('solver_'))
    row['solver_lr'] = s.schedule.learning_rate

    state.solver = new_s
    state.discriminator = new_d
    state.epoch = epoch + 1
    state.history.append(row)
    return state


def evaluation_points(problem: ControlBenchmark) -> np.ndarray:
    """
    Dense points the reported errors are measured on.
    """
    return grid_1d(201).interior if problem.spatial_dim == 1 else grid_2d(64, 4).interior


def evaluate_network(problem: ControlBenchmark, spec: MlpSpec, params: np.ndarray,
                     points: np.ndarray) -> typing.Tuple[pd.DataFrame, typing.Dict[str, float]]:
    """
    Compares a network with the analytic optimum.

    :param problem: The benchmark.
    :param spec: Network shape.
    :param params: Flat parameters.
    :param points: ``samples × spatial_dim`` evaluation points.
    :return: Per-point table and the error metrics.
    """
    ev = MlpNet(spec, params).second_order(points)
    u = ev.value[:, 0]
    gradient = ev.input_gradient[:, 0, :]
    hessian = ev.input_hessian_diagonal[:, 0, :]
    control = ev.value[:, 1] if problem.output_dim > 1 else None

    table = pd.DataFrame({name: points[:, i] for i, name in enumerate(['x', 'y'][:problem.spatial_dim])})
    table['u_pred'] = u
    table['u_analytic'] = problem.analytic_solution(points)
    table['u_error'] = np.abs(u - table['u_analytic'].to_numpy())
    gradient_error = np.abs(gradient - problem.analytic_gradient(points)).max(axis=1)
    laplacian_error = np.abs(hessian.sum(axis=1) - problem.analytic_laplacian(points))
    table['gradient_error'] = gradient_error
    table['laplacian_error'] = laplacian_error
    if control is not None:
        table['f_pred'] = control
        table['f_analytic'] = problem.analytic_control(points)
        table['f_error'] = np.abs(control - table['f_analytic'].to_numpy())
    residual = np.asarray(problem.pde_residual(points, u, hessian, control))
    table['residual'] = residual

    metrics = {
        'max_u_error': float(table['u_error'].max()),
        'max_gradient_error': float(gradient_error.max()),
        'max_laplacian_error': float(laplacian_error.max()),
        'residual_max': float(np.abs(residual).max()),
        'residual_mse': float(np.mean(residual * residual)),
    }
    if control is not None:
        metrics['max_f_error'] = float(table['f_error'].max())
    return table, metrics


def plateau_epoch(losses: typing.Sequence[float], tolerance: float = PLATEAU_TOLERANCE) -> typing.Optional[int]:
    """
    First epoch whose loss lies within ``tolerance`` (relative) of the final loss.
    """
    values = np.asarray(losses, dtype=np.float64)
    if values.size == 0:
        return None
    final = values[-1]
    close = np.flatnonzero(np.abs(values - final) <= tolerance * abs(final))
    return int(close[0])


@dataclass
class TrainResult:
    state: TrainState
    metrics: dict
    solution: pd.DataFrame
    specs: typing.Tuple[MlpSpec, typing.Optional[MlpSpec]]


def _network_metrics(problem, spec, network: NetworkState, history: pd.DataFrame, prefix: str,
                     points: np.ndarray) -> typing.Tuple[dict, pd.DataFrame]:
    params = network.params if network.best_params is None else network.best_params
    table, metrics = evaluate_network(problem, spec, params, points)
    if not history.empty:
        losses = history[f'{prefix}total']
        metrics['final_loss'] = float(losses.iloc[-1])
        metrics['best_loss'] = float(losses.min())
        metrics['final_objective'] = float(history[f'{prefix}objective'].iloc[-1])
        metrics['plateau_epoch'] = plateau_epoch(losses.to_numpy())
    metrics['best_tracked_value'] = None if np.isinf(network.best_value) else float(network.best_value)
    metrics['final_learning_rate'] = network.schedule.learning_rate
    return metrics, table


def train(config: TrainerConfig, problem: typing.Optional[ControlBenchmark] = None,
          specs: typing.Optional[typing.Tuple[MlpSpec, typing.Optional[MlpSpec]]] = None,
          state: typing.Optional[TrainState] = None) -> TrainResult:
    """
    Runs ``config.max_epochs`` epochs.

    Example:

    ::

        config = load_config('configs/ex1-pan.json').with_max_epochs(1000)
        result = train(config)
        print(result.metrics['solver']['max_u_error'])

    :param config: Run configuration.
    :param problem: Benchmark, built from the configuration when omitted.
    :param specs: Solver and discriminator shapes, derived from the configuration when omitted.
    :param state: Starting state, freshly initialised when omitted.
    :return: Final state, metrics measured at the best weights and the per-point solution table.
    """
    problem = problem or get_problem(config.problem, **config.problem_parameters)
    spec_s, spec_d = specs or network_specs(config, problem)
    samples = problem.sample_grid(config.n, config.n_boundary)
    state = state or initial_state(config, spec_s, spec_d)

    log.info(f'training {config.label or config.problem} ({config.mode.value}) for {config.max_epochs} epochs')
    started = time.perf_counter()
    while state.epoch < config.max_epochs:
        train_epoch(state, config, problem, spec_s, spec_d, samples)
        if state.epoch % config.log_every == 0 or state.epoch == config.max_epochs:
            row = state.history[-1]
            message = f'epoch {row["epoch"]}: L^s={row["solver_total"]:.6g} (lr {row["solver_lr"]:g})'
            if 'discriminator_total' in row:
                message += f', L^d={row["discriminator_total"]:.6g} (lr {row["discriminator_lr"]:g})'
            log.info(message)
    wall_time = time.perf_counter() - started

    history = state.history_frame()
    points = evaluation_points(problem)
    solver_metrics, solver_table = _network_metrics(problem, spec_s, state.solver, history, 'solver_', points)
    solver_table.insert(0, 'network', 'solver')
    tables = [solver_table]
    metrics = {
        'label': config.label,
        'problem': problem.name,
        'mode': config.mode.value,
        'seed': config.seed,
        'epochs_run': state.epoch,
        'wall_time_seconds': wall_time,
        'determinism': DETERMINISM_NOTE,
        'solver': solver_metrics,
    }
    if state.discriminator is not None:
        d_metrics, d_table = _network_metrics(problem, spec_d, state.discriminator, history,
                                              'discriminator_', points)
        d_table.insert(0, 'network', 'discriminator')
        tables.append(d_table)
        metrics['discriminator'] = d_metrics
    return TrainResult(state, metrics, pd.concat(tables, ignore_index=True), (spec_s, spec_d))
