"""
Command line entry point, installed as ``pan``.

Every subcommand writes into its own output directory (``--out``) together
with a ``manifest.json``; a non-empty directory is refused unless ``--force``
is given. Exit codes: 0 success, 1 failed verification, 2 usage or
configuration error, 3 numerical divergence.
"""
import argparse
import json
import logging
import os
import sys
import typing

import numpy as np
import pandas as pd

from pan.exceptions import (
    ConditionFailedError,
    ConfigError,
    ContractViolationError,
    DivergenceError,
    DomainError,
    OutputExistsError,
    SingularSystemError
)
from pan.io import RunManifest, prepare_output_dir, write_csv, write_json
from pan.linear import (
    LinearControlProblem,
    PapConfig,
    admissible_objective_band,
    anchor,
    condition_number,
    contour_grid,
    equivalent_lambda,
    evaluate_objective,
    evaluate_remainder,
    exact_solution,
    minimize_pap,
    minimize_penalty,
    objective_field,
    omega_upper_bound,
    pap_field,
    penalty_field,
    penalty_solution,
    theorem_condition,
    toy_problem
)
from pan.net import save_checkpoint
from pan.problems import get_problem
from pan.training import TrainResult, TrainState, initial_state, load_config, network_specs, train
from pan.verify import all_passed, results_table, run_checks

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

DEFAULT_BOUNDS = (-0.5, 2.5, -0.5, 2.5)

COMPARED_METRICS = ['max_u_error', 'max_gradient_error', 'max_laplacian_error', 'max_f_error',
                    'residual_max', 'residual_mse', 'final_objective', 'best_loss', 'plateau_epoch']


def _load_linear(path: typing.Optional[str]) -> LinearControlProblem:
    return toy_problem() if path is None else LinearControlProblem.load(path)


def _bounds(values: typing.Sequence[float]) -> typing.Tuple[typing.Tuple[float, float], typing.Tuple[float, float]]:
    u_min, u_max, y_min, y_max = values
    if not (u_min < u_max and y_min < y_max):
        raise ContractViolationError(f'empty contour window {tuple(values)}')
    return (u_min, u_max), (y_min, y_max)


def _demo_omega(problem: LinearControlProblem, lambda1: float, lambda2: float) -> float:
    """
    Half the admissible ω bound, or 1 when the bound is unavailable.
    """
    try:
        bound = omega_upper_bound(problem, lambda1, lambda2)
    except ConditionFailedError:
        return 1.0
    return bound.value / 2 if bound.bounded else 1.0


def _solution_row(problem: LinearControlProblem, name: str, point, **extra) -> dict:
    row = {'solution': name}
    row.update({f'u_{i}': float(v) for i, v in enumerate(point.u)})
    row.update({f'y_{i}': float(v) for i, v in enumerate(point.y)})
    row['objective'] = evaluate_objective(problem, point)
    row['remainder'] = evaluate_remainder(problem, point)
    row.update(extra)
    return row


def _write_contour(manifest: RunManifest, frame: pd.DataFrame, name: str):
    write_csv(frame, os.path.join(manifest.output_dir, name))
    manifest.outputs.append(name)


def cmd_verify(args: argparse.Namespace, manifest: RunManifest) -> int:
    results = run_checks(args.lambda1, args.lambda2, args.seed or 0)
    table = results_table(results)
    write_csv(table, os.path.join(manifest.output_dir, 'checks.csv'))
    manifest.outputs.append('checks.csv')
    print(table.to_string(index=False))
    if not all_passed(results):
        failed = [r.name for r in results if not (r.passed or r.informational)]
        print(f'failed: {", ".join(failed)}', file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_linear(args: argparse.Namespace, manifest: RunManifest) -> int:
    problem = _load_linear(args.problem)
    omega = _demo_omega(problem, args.lambda1, args.lambda2) if args.omega is None else args.omega
    config = PapConfig(args.lambda1, args.lambda2, omega, args.power)
    _, j2, r2 = anchor(problem, args.lambda2)
    origin = problem.point(np.zeros(problem.n), np.zeros(problem.m))

    penalty_descent = minimize_penalty(problem, args.lambda1, origin)
    pap = minimize_pap(problem, config, j2, origin)
    rows = [
        _solution_row(problem, 'exact', exact_solution(problem)),
        _solution_row(problem, 'penalty_lambda1', penalty_solution(problem, args.lambda1),
                      iterations=penalty_descent.iterations, converged=penalty_descent.converged),
        _solution_row(problem, 'penalty_lambda2', penalty_solution(problem, args.lambda2)),
        _solution_row(problem, 'pap', pap.point, iterations=pap.iterations, converged=pap.converged),
    ]
    for sweep in args.omegas:
        result = minimize_pap(problem, PapConfig(args.lambda1, args.lambda2, sweep, args.power), j2, origin)
        rows.append(_solution_row(problem, f'pap_omega={sweep:g}', result.point,
                                  iterations=result.iterations, converged=result.converged))
    write_csv(pd.DataFrame(rows), os.path.join(manifest.output_dir, 'solutions.csv'))
    manifest.outputs.append('solutions.csv')

    condition = theorem_condition(problem, args.lambda1, args.lambda2)
    report = {
        'lambda1': args.lambda1,
        'lambda2': args.lambda2,
        'omega': omega,
        'power_k': args.power,
        'theorem_condition': {'holds': condition.holds, 'margin': condition.margin},
        'condition_number': {'lambda1': condition_number(problem, args.lambda1),
                             'lambda2': condition_number(problem, args.lambda2)},
    }
    try:
        bound = omega_upper_bound(problem, args.lambda1, args.lambda2)
        report['omega_bound'] = {'value': bound.value, 'bounded': bound.bounded}
    except ConditionFailedError as e:
        report['omega_bound'] = {'error': str(e)}
    try:
        j = evaluate_objective(problem, pap.point)
        report['equivalent_lambda'] = equivalent_lambda(config, j, j2)
        report['objective_band'] = list(admissible_objective_band(problem, config, j2, r2,
                                                                  evaluate_remainder(problem, pap.point)))
    except DomainError as e:
        report['equivalent_lambda_error'] = str(e)
    write_json(report, os.path.join(manifest.output_dir, 'conditions.json'))
    manifest.outputs.append('conditions.json')

    if problem.n == 1 and problem.m == 1 and problem.A.shape[0] == 1:
        bounds, resolution = _bounds(args.bounds), args.resolution
        _write_contour(manifest, contour_grid(penalty_field(problem, args.lambda1), bounds, resolution),
                       'contour_penalty_lambda1.csv')
        _write_contour(manifest, contour_grid(penalty_field(problem, args.lambda2), bounds, resolution),
                       'contour_penalty_lambda2.csv')
        _write_contour(manifest, contour_grid(pap_field(problem, config, j2), bounds, resolution), 'contour_pap.csv')
        for sweep in args.omegas:
            field = pap_field(problem, PapConfig(args.lambda1, args.lambda2, sweep, args.power), j2)
            _write_contour(manifest, contour_grid(field, bounds, resolution), f'contour_pap_omega={sweep:g}.csv')
        for k in args.powers:
            field = pap_field(problem, PapConfig(args.lambda1, args.lambda2, args.sweep_omega, k), j2)
            _write_contour(manifest, contour_grid(field, bounds, resolution), f'contour_pap_k={k}.csv')
    else:
        log.info(f'{problem} is not scalar, skipping contours')
    return EXIT_OK


def cmd_contour(args: argparse.Namespace, manifest: RunManifest) -> int:
    problem = _load_linear(args.problem)
    if args.field == 'objective':
        field = objective_field(problem)
    elif args.field == 'penalty':
        field = penalty_field(problem, args.lam)
    else:
        _, j2, _ = anchor(problem, args.lambda2)
        omega = _demo_omega(problem, args.lambda1, args.lambda2) if args.omega is None else args.omega
        field = pap_field(problem, PapConfig(args.lambda1, args.lambda2, omega, args.power), j2)
    _write_contour(manifest, contour_grid(field, _bounds(args.bounds), args.resolution), f'contour_{args.field}.csv')
    return EXIT_OK


def _write_training_outputs(manifest: RunManifest, state: TrainState, specs, result: typing.Optional[TrainResult]):
    out = manifest.output_dir
    write_csv(state.history_frame(), os.path.join(out, 'history.csv'))
    manifest.outputs.append('history.csv')
    spec_s, spec_d = specs
    for name, spec, network in (('solver', spec_s, state.solver), ('discriminator', spec_d, state.discriminator)):
        if network is None:
            continue
        params = network.params if network.best_params is None else network.best_params
        best = None if np.isinf(network.best_value) else network.best_value
        save_checkpoint(os.path.join(out, f'{name}_best.npz'), spec, params, best)
        manifest.outputs.append(f'{name}_best.npz')
    if result is not None:
        write_csv(result.solution, os.path.join(out, 'solution.csv'))
        write_json(result.metrics, os.path.join(out, 'metrics.json'))
        manifest.outputs.extend(['solution.csv', 'metrics.json'])


def cmd_train(args: argparse.Namespace, manifest: RunManifest) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.max_epochs is not None:
        config = config.with_max_epochs(args.max_epochs)
    manifest.seed = config.seed
    write_json(config.to_dict(), os.path.join(manifest.output_dir, 'config.json'))
    manifest.outputs.append('config.json')

    problem = get_problem(config.problem, **config.problem_parameters)
    specs = network_specs(config, problem)
    state = initial_state(config, *specs)
    try:
        result = train(config, problem, specs, state)
    except DivergenceError as e:
        log.error(f'training diverged: {e}')
        last_good = e.last_good if isinstance(e.last_good, TrainState) else state
        _write_training_outputs(manifest, last_good, specs, None)
        raise
    _write_training_outputs(manifest, result.state, specs, result)
    solver = result.metrics['solver']
    print(f'{config.label or config.problem}: solver max|u error| {solver["max_u_error"]:.6g}, '
          f'residual mse {solver["residual_mse"]:.6g}')
    return EXIT_OK


def _read_metrics(run_dir: str) -> dict:
    path = os.path.join(run_dir, 'metrics.json')
    try:
        with open(path) as f:
            metrics = json.load(f)
    except OSError as e:
        raise ConfigError(f'{path}: {e.strerror}') from e
    except json.JSONDecodeError as e:
        raise ConfigError(f'{path}:{e.lineno}:{e.colno}: {e.msg}') from e
    metrics['run'] = run_dir
    return metrics


def compare_runs(run_dirs: typing.Sequence[str]) -> typing.Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Lines up completed training runs.

    :param run_dirs: Output directories of ``pan train``, all on the same problem.
    :return: One row per run, and mean/min/max per label and mode across seeds.
    """
    if len(run_dirs) < 2:
        raise ConfigError('compare needs at least two runs')
    frame = pd.json_normalize([_read_metrics(d) for d in run_dirs])
    problems = sorted(frame['problem'].unique())
    if len(problems) > 1:
        raise ConfigError(f'runs are on different problems: {problems}')

    columns = [f'{network}.{metric}' for network in ('solver', 'discriminator') for metric in COMPARED_METRICS
               if f'{network}.{metric}' in frame.columns]
    frame['label'] = frame['label'].fillna('').replace('', np.nan).fillna(frame['mode'])
    runs = frame[['run', 'label', 'mode', 'seed'] + columns]
    summary = runs.groupby(['label', 'mode'], sort=True)[columns].agg(['mean', 'min', 'max'])
    summary.columns = [f'{column}.{stat}' for column, stat in summary.columns]
    return runs, summary.reset_index()


def cmd_compare(args: argparse.Namespace, manifest: RunManifest) -> int:
    runs, summary = compare_runs(args.runs)
    write_csv(runs, os.path.join(manifest.output_dir, 'runs.csv'))
    write_csv(summary, os.path.join(manifest.output_dir, 'summary.csv'))
    manifest.outputs.extend(['runs.csv', 'summary.csv'])
    with pd.option_context('display.width', 200, 'display.max_columns', None):
        print(runs.drop(columns=['run']).to_string(index=False))
    return EXIT_OK


def _add_pap_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--lambda1', type=float, default=5.0, help='large penalty weight')
    parser.add_argument('--lambda2', type=float, default=0.5, help='small penalty weight of the anchor')
    parser.add_argument('--omega', type=float, default=None,
                        help='adversarial weight (default half the admissible bound)')
    parser.add_argument('--power', type=int, default=2, help='exponent k of the objective gap')


def _add_grid_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--bounds', type=float, nargs=4, default=DEFAULT_BOUNDS,
                        metavar=('U_MIN', 'U_MAX', 'Y_MIN', 'Y_MAX'))
    parser.add_argument('--resolution', type=int, default=201, help='grid points per axis')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='random seed')
    common.add_argument('--out', default=None, help='output directory (default runs/<command>)')
    common.add_argument('--force', action='store_true', help='write into a non-empty output directory')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v for info, -vv for debug')

    parser = argparse.ArgumentParser(prog='pan', description='Penalty adversarial networks and problems.')
    commands = parser.add_subparsers(dest='command', required=True)

    verify = commands.add_parser('verify', parents=[common], help='run the property checks')
    verify.add_argument('--lambda1', type=float, default=5.0)
    verify.add_argument('--lambda2', type=float, default=0.5)
    verify.set_defaults(handler=cmd_verify)

    linear = commands.add_parser('linear', parents=[common], help='solve a linear problem every way')
    linear.add_argument('problem', nargs='?', help='linear problem JSON, the toy problem when omitted')
    _add_pap_arguments(linear)
    _add_grid_arguments(linear)
    linear.add_argument('--omegas', type=float, nargs='*', default=[0.1, 1.0, 10.0], help='omega sweep')
    linear.add_argument('--powers', type=int, nargs='*', default=list(range(1, 10)), help='k sweep')
    linear.add_argument('--sweep-omega', type=float, default=5.0, help='omega used by the k sweep')
    linear.set_defaults(handler=cmd_linear)

    contour = commands.add_parser('contour', parents=[common], help='sample one field of a linear problem')
    contour.add_argument('problem', nargs='?', help='linear problem JSON, the toy problem when omitted')
    contour.add_argument('--field', choices=['objective', 'penalty', 'pap'], default='pap')
    contour.add_argument('--lam', type=float, default=5.0, help='penalty weight of the penalty field')
    _add_pap_arguments(contour)
    _add_grid_arguments(contour)
    contour.set_defaults(handler=cmd_contour)

    train_parser = commands.add_parser('train', parents=[common], help='train networks from a config')
    train_parser.add_argument('config', help='run configuration JSON')
    train_parser.add_argument('--max-epochs', type=int, default=None, help='override the epoch budget')
    train_parser.set_defaults(handler=cmd_train)

    compare = commands.add_parser('compare', parents=[common], help='tabulate finished training runs')
    compare.add_argument('runs', nargs='+', help='output directories of pan train')
    compare.set_defaults(handler=cmd_compare)
    return parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    out = args.out or os.path.join('runs', args.command)
    try:
        prepare_output_dir(out, args.force)
        manifest = RunManifest(command=args.command, output_dir=out,
                               config_path=getattr(args, 'config', None) or getattr(args, 'problem', None),
                               seed=args.seed)
        code = args.handler(args, manifest)
    except (ConfigError, ContractViolationError, OutputExistsError, SingularSystemError) as e:
        print(f'pan {args.command}: {e}', file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as e:
        manifest.finish()
        manifest.write()
        print(f'pan {args.command}: {e}', file=sys.stderr)
        return EXIT_DIVERGED

    manifest.finish()
    manifest.write()
    return code
