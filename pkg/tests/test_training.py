import dataclasses
import glob
import json
import os
import tempfile
import unittest
import warnings

import numpy as np

from pan.exceptions import ConfigError, DivergenceError, WeightOrderingWarning
from pan.net import MlpSpec, init_params
from pan.problems import BoundaryControl1D, DistributedControl2DPoisson
from pan.training import (
    Adam,
    Mode,
    NetworkConfig,
    PenaltyWeights,
    ScheduleConfig,
    SchedulerState,
    Sgd,
    TrainerConfig,
    evaluate_network,
    initial_state,
    load_config,
    lr_schedule_update,
    network_specs,
    penalty_loss,
    penalty_loss_gradient,
    plateau_epoch,
    solver_loss,
    solver_loss_gradient,
    train,
    train_epoch
)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')


def small_config(**overrides) -> TrainerConfig:
    settings = dict(
        problem='poisson1d-boundary',
        solver=NetworkConfig(depth=1, width=4, learning_rate=1e-3, weights=PenaltyWeights(lambda_p=10.0)),
        discriminator=NetworkConfig(depth=1, width=4, learning_rate=1e-3, weights=PenaltyWeights(lambda_p=1.0)),
        n=8,
        max_epochs=6,
        warmup_epochs=2,
        patience=2,
        log_every=3,
    )
    settings.update(overrides)
    return TrainerConfig(**settings)


class TestSchedule(unittest.TestCase):

    def test_constant_loss_halves_after_patience(self):
        state = SchedulerState(1e-3)
        config = ScheduleConfig(patience=3, min_learning_rate=1e-4)
        rates = []
        for epoch in range(12):
            state = lr_schedule_update(state, 1.0, epoch, config)
            rates.append(state.learning_rate)
        self.assertEqual(rates[:3], [1e-3] * 3)
        self.assertEqual(rates[3:6], [5e-4] * 3)
        self.assertEqual(rates[6:9], [2.5e-4] * 3)
        self.assertEqual(rates[9:], [1.25e-4] * 3)

    def test_improvement_resets_counter(self):
        state = SchedulerState(1e-3)
        config = ScheduleConfig(patience=2, min_learning_rate=1e-4)
        for epoch, loss in enumerate([5.0, 4.0, 3.0, 2.0, 1.0]):
            state = lr_schedule_update(state, loss, epoch, config)
        self.assertEqual(state.learning_rate, 1e-3)
        self.assertEqual(state.best_loss, 1.0)
        self.assertEqual(state.epochs_since_improvement, 0)

    def test_start_epoch_delays_halving(self):
        state = SchedulerState(1e-3)
        config = ScheduleConfig(patience=1, min_learning_rate=1e-4, start_epoch=5)
        for epoch in range(5):
            state = lr_schedule_update(state, 1.0, epoch, config)
        self.assertEqual(state.learning_rate, 1e-3)
        state = lr_schedule_update(state, 1.0, 5, config)
        self.assertEqual(state.learning_rate, 5e-4)

    def test_floor(self):
        state = SchedulerState(1e-4)
        for epoch in range(10):
            state = lr_schedule_update(state, 1.0, epoch, ScheduleConfig(1, 1e-4))
        self.assertEqual(state.learning_rate, 1e-4)


class TestOptimizers(unittest.TestCase):

    def test_sgd(self):
        params, state = Sgd().step(np.array([1.0, 2.0]), np.array([10.0, -10.0]), 0.1, None)
        np.testing.assert_allclose(params, [0.0, 3.0])
        self.assertIsNone(state)

    def test_adam_first_step_is_sign_step(self):
        adam = Adam()
        params = np.array([1.0, 2.0, 3.0])
        new, state = adam.step(params, np.array([0.5, -20.0, 0.0]), 1e-3, adam.init(params))
        np.testing.assert_allclose(new, [1.0 - 1e-3, 2.0 + 1e-3, 3.0], atol=1e-10)
        self.assertEqual(state.steps, 1)

    def test_adam_reaches_quadratic_minimum(self):
        adam = Adam()
        params = np.array([3.0, -2.0])
        state = adam.init(params)
        for _ in range(3000):
            params, state = adam.step(params, 2 * params, 1e-2, state)
        self.assertLess(np.abs(params).max(), 5e-2)


class TestConfig(unittest.TestCase):

    def test_round_trip(self):
        config = small_config(label='tiny', one_sided=True, freeze_discriminator_after=4)
        self.assertEqual(TrainerConfig.from_dict(config.to_dict()), config)

    def test_defaults(self):
        config = TrainerConfig.from_dict({'schema_version': 1, 'problem': 'poisson1d-boundary', 'mode': 'penalty',
                                          'solver': {}, 'max_epochs': 100})
        self.assertEqual(config.mode, Mode.PENALTY)
        self.assertEqual(config.warmup_epochs, 5)
        self.assertEqual(config.solver.width, 40)
        self.assertIsNone(config.discriminator)

    def test_schema_version_required(self):
        with self.assertRaises(ConfigError):
            TrainerConfig.from_dict({'problem': 'poisson1d-boundary', 'solver': {}})

    def test_unknown_keys(self):
        data = small_config().to_dict()
        data['learning_rate'] = 0.1
        with self.assertRaises(ConfigError):
            TrainerConfig.from_dict(data)
        data = small_config().to_dict()
        data['solver']['weights']['pde_weight'] = 1.0
        with self.assertRaises(ConfigError):
            TrainerConfig.from_dict(data)

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            small_config(omega=-1.0)
        with self.assertRaises(ConfigError):
            small_config(discriminator=None)
        with self.assertRaises(ConfigError):
            small_config(min_learning_rate=1e-2)
        with self.assertRaises(ConfigError):
            small_config(warmup_epochs=6)
        with self.assertRaises(ConfigError):
            PenaltyWeights(lambda_p=-1.0)
        data = small_config().to_dict()
        data['mode'] = 'adversarial'
        with self.assertRaises(ConfigError):
            TrainerConfig.from_dict(data)

    def test_weight_ordering_warning(self):
        with self.assertWarns(WeightOrderingWarning):
            small_config(solver=NetworkConfig(1, 4, 1e-3, PenaltyWeights(lambda_p=0.5)))

    def test_with_max_epochs_rescales_default_warmup(self):
        config = TrainerConfig.from_dict({'schema_version': 1, 'problem': 'poisson1d-boundary', 'mode': 'penalty',
                                          'solver': {}, 'max_epochs': 200000})
        self.assertEqual(config.with_max_epochs(1000).warmup_epochs, 50)
        self.assertEqual(small_config(warmup_epochs=3).with_max_epochs(100).warmup_epochs, 3)

    def test_load_config_reports_position(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'broken.json')
            with open(path, 'w') as f:
                f.write('{\n  "schema_version": 1,\n  "problem": "poisson1d-boundary",,\n}')
            with self.assertRaises(ConfigError) as ctx:
                load_config(path)
            self.assertIn('broken.json:3:', str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config('/nonexistent/pan.json')

    def test_checked_in_configs(self):
        paths = sorted(glob.glob(os.path.join(CONFIG_DIR, 'ex*.json')))
        self.assertEqual(len(paths), 9)
        with warnings.catch_warnings():
            warnings.simplefilter('error', WeightOrderingWarning)
            for path in paths:
                config = load_config(path)
                self.assertEqual(config.label, os.path.splitext(os.path.basename(path))[0])
        ex1 = load_config(os.path.join(CONFIG_DIR, 'ex1-pan.json'))
        self.assertEqual((ex1.solver.depth, ex1.solver.width, ex1.n), (4, 40, 32))
        self.assertEqual((ex1.solver.weights.lambda_p, ex1.discriminator.weights.lambda_p, ex1.omega), (5000, 1, 1))
        ex3 = load_config(os.path.join(CONFIG_DIR, 'ex3-pan.json'))
        self.assertEqual((ex3.omega, ex3.patience, ex3.schedule_start_epoch), (20000, 10000, 300000))

    def test_linear_toy_config(self):
        with open(os.path.join(CONFIG_DIR, 'toy.json')) as f:
            data = json.load(f)
        self.assertEqual(data['A'], [[1.0]])


class TestLosses(unittest.TestCase):

    def setUp(self):
        self.problem = BoundaryControl1D()
        self.spec = MlpSpec(1, 1, 2, 5)
        self.params = init_params(self.spec, 0)
        self.samples = self.problem.sample_grid(8)

    def test_zero_network(self):
        params = np.zeros(self.spec.param_count)
        loss = penalty_loss(self.problem, self.spec, params, self.samples, PenaltyWeights(lambda_p=1.0))
        x = self.samples.interior[:, 0]
        expected_pde = np.mean((self.problem.amplitude * np.sin(2 * np.pi * x)) ** 2)
        expected_objective = 0.5 * np.mean(self.problem.desired_state(x.reshape(-1, 1)) ** 2)
        self.assertAlmostEqual(loss.pde, expected_pde, places=8)
        self.assertAlmostEqual(loss.objective, expected_objective, places=10)
        self.assertEqual(loss.boundary, 0.0)
        self.assertAlmostEqual(loss.total, expected_objective + expected_pde, places=8)

    def test_weights_scale_terms(self):
        one = penalty_loss(self.problem, self.spec, self.params, self.samples, PenaltyWeights(lambda_p=1.0))
        many = penalty_loss(self.problem, self.spec, self.params, self.samples, PenaltyWeights(lambda_p=100.0))
        np.testing.assert_allclose(many.total - many.objective, 100 * (one.total - one.objective), rtol=1e-10)

    def test_adversarial_term(self):
        weights = PenaltyWeights(lambda_p=3.0)
        base = penalty_loss(self.problem, self.spec, self.params, self.samples, weights)
        target = base.objective - 0.7
        loss = solver_loss(self.problem, self.spec, self.params, target, self.samples, weights, 2.0)
        self.assertAlmostEqual(loss.adversarial, 0.49, places=10)
        np.testing.assert_allclose(loss.total, base.total + 2.0 * 0.49, rtol=1e-12)

    def test_zero_omega_is_penalty_loss(self):
        weights = PenaltyWeights(lambda_p=3.0)
        base, base_grad = penalty_loss_gradient(self.problem, self.spec, self.params, self.samples, weights)
        loss, grad = solver_loss_gradient(self.problem, self.spec, self.params, 1.0, self.samples, weights, 0.0)
        self.assertEqual(loss.total, base.total)
        np.testing.assert_array_equal(grad, base_grad)

    def test_one_sided(self):
        weights = PenaltyWeights(lambda_p=3.0)
        base = penalty_loss(self.problem, self.spec, self.params, self.samples, weights)
        below = solver_loss(self.problem, self.spec, self.params, base.objective + 1.0, self.samples, weights,
                            5.0, one_sided=True)
        self.assertEqual(below.adversarial, 0.0)
        self.assertAlmostEqual(below.total, base.total, places=10)
        above = solver_loss(self.problem, self.spec, self.params, base.objective - 1.0, self.samples, weights,
                            5.0, one_sided=True)
        self.assertAlmostEqual(above.adversarial, 1.0, places=10)

    def test_solver_gradient_is_scaled_penalty_gradient(self):
        weights = PenaltyWeights(lambda_p=40.0)
        omega = 3.0
        base = penalty_loss(self.problem, self.spec, self.params, self.samples, weights)
        target = base.objective - 0.25
        scale = 1 + 2 * omega * 0.25
        _, grad = solver_loss_gradient(self.problem, self.spec, self.params, target, self.samples, weights, omega)
        _, reference = penalty_loss_gradient(self.problem, self.spec, self.params, self.samples,
                                             PenaltyWeights(lambda_p=40.0 / scale))
        np.testing.assert_allclose(grad, scale * reference, rtol=1e-8, atol=1e-7)

    def test_gradients_against_finite_differences(self):
        problem = DistributedControl2DPoisson()
        spec = MlpSpec(2, 2, 1, 3)
        params = init_params(spec, 1)
        samples = problem.sample_grid(3, 4)
        weights = PenaltyWeights(lambda_p=2.0, lambda_b=5.0)
        _, grad = solver_loss_gradient(problem, spec, params, 1.0, samples, weights, 0.5)
        numeric = np.zeros_like(params)
        for i in range(params.size):
            up, down = params.copy(), params.copy()
            up[i] += 1e-6
            down[i] -= 1e-6
            numeric[i] = (solver_loss(problem, spec, up, 1.0, samples, weights, 0.5).total
                          - solver_loss(problem, spec, down, 1.0, samples, weights, 0.5).total) / 2e-6
        self.assertLess(np.linalg.norm(grad - numeric) / np.linalg.norm(numeric), 1e-5)


class TestTrainer(unittest.TestCase):

    def test_initial_state(self):
        config = small_config()
        spec_s, spec_d = network_specs(config, BoundaryControl1D())
        state = initial_state(config, spec_s, spec_d)
        np.testing.assert_array_equal(state.solver.params, init_params(spec_s, 0))
        np.testing.assert_array_equal(state.discriminator.params, init_params(spec_d, 1))
        self.assertEqual(state.epoch, 0)

    def test_penalty_mode_has_no_discriminator(self):
        result = train(small_config(mode='penalty', discriminator=None))
        self.assertIsNone(result.state.discriminator)
        self.assertNotIn('discriminator', result.metrics)
        self.assertEqual(set(result.solution['network']), {'solver'})
        self.assertFalse(any(column.startswith('discriminator') for column in result.state.history_frame()))

    def test_history_and_metrics(self):
        result = train(small_config())
        history = result.state.history_frame()
        self.assertEqual(history['epoch'].tolist(), list(range(6)))
        for column in ('solver_total', 'solver_objective', 'solver_adversarial', 'solver_lr',
                       'discriminator_total', 'discriminator_pde', 'discriminator_lr'):
            self.assertIn(column, history.columns)
        self.assertEqual(result.metrics['epochs_run'], 6)
        self.assertEqual(result.metrics['problem'], 'poisson1d-boundary')
        for key in ('max_u_error', 'max_gradient_error', 'max_laplacian_error', 'residual_mse', 'plateau_epoch'):
            self.assertIn(key, result.metrics['solver'])
            self.assertIn(key, result.metrics['discriminator'])
        self.assertEqual(set(result.solution['network']), {'solver', 'discriminator'})

    def test_best_weights_follow_tracked_losses(self):
        result = train(small_config())
        history = result.state.history_frame()
        after_warmup = history[history['epoch'] >= 2]
        self.assertEqual(result.state.solver.best_value, after_warmup['solver_objective'].min())
        self.assertEqual(result.state.discriminator.best_value, after_warmup['discriminator_total'].min())
        self.assertIsNotNone(result.state.solver.best_params)

    def test_penalty_mode_tracks_total(self):
        result = train(small_config(mode='penalty', discriminator=None))
        history = result.state.history_frame()
        self.assertEqual(result.state.solver.best_value, history[history['epoch'] >= 2]['solver_total'].min())

    def test_zero_omega_matches_penalty_training(self):
        pan_result = train(small_config(omega=0.0))
        penalty_result = train(small_config(mode='penalty', discriminator=None))
        np.testing.assert_array_equal(pan_result.state.solver.params, penalty_result.state.solver.params)

    def test_symmetric_networks_follow_identical_trajectories(self):
        network = NetworkConfig(depth=1, width=4, learning_rate=1e-3, weights=PenaltyWeights(lambda_p=3.0))
        config = small_config(solver=network, discriminator=network, omega=0.0)
        problem = BoundaryControl1D()
        spec_s, spec_d = network_specs(config, problem)
        samples = problem.sample_grid(config.n, config.n_boundary)
        state = initial_state(config, spec_s, spec_d, discriminator_seed=config.seed)
        for _ in range(4):
            train_epoch(state, config, problem, spec_s, spec_d, samples)
            np.testing.assert_array_equal(state.solver.params, state.discriminator.params)

    def test_zero_learning_rate_keeps_parameters(self):
        config = small_config()
        problem = BoundaryControl1D()
        spec_s, spec_d = network_specs(config, problem)
        samples = problem.sample_grid(config.n, config.n_boundary)
        state = initial_state(config, spec_s, spec_d)
        for network in (state.solver, state.discriminator):
            network.schedule = SchedulerState(0.0)
        before = state.solver.params.copy(), state.discriminator.params.copy()
        train_epoch(state, config, problem, spec_s, spec_d, samples)
        np.testing.assert_array_equal(state.solver.params, before[0])
        np.testing.assert_array_equal(state.discriminator.params, before[1])
        self.assertEqual(len(state.history), 1)

    def test_no_epochs(self):
        result = train(small_config(max_epochs=0, warmup_epochs=0))
        self.assertEqual(result.state.epoch, 0)
        self.assertEqual(result.state.history, [])
        self.assertIsNone(result.state.solver.best_params)
        self.assertIsNone(result.metrics['solver']['best_tracked_value'])
        self.assertNotIn('final_loss', result.metrics['solver'])

    def test_deterministic(self):
        first, second = train(small_config()), train(small_config())
        np.testing.assert_array_equal(first.state.solver.params, second.state.solver.params)
        self.assertTrue(first.state.history_frame().equals(second.state.history_frame()))
        strip = {key: value for key, value in first.metrics.items() if key != 'wall_time_seconds'}
        self.assertEqual(strip, {key: value for key, value in second.metrics.items() if key != 'wall_time_seconds'})

    def test_frozen_discriminator(self):
        config = small_config(freeze_discriminator_after=2)
        problem = BoundaryControl1D()
        spec_s, spec_d = network_specs(config, problem)
        samples = problem.sample_grid(config.n, config.n_boundary)
        state = initial_state(config, spec_s, spec_d)
        snapshots = []
        for _ in range(4):
            train_epoch(state, config, problem, spec_s, spec_d, samples)
            snapshots.append(state.discriminator.params.copy())
        self.assertFalse(np.array_equal(snapshots[0], snapshots[1]))
        np.testing.assert_array_equal(snapshots[1], snapshots[2])
        np.testing.assert_array_equal(snapshots[2], snapshots[3])

    def test_divergence_keeps_last_good_state(self):
        config = small_config()
        problem = BoundaryControl1D()
        spec_s, spec_d = network_specs(config, problem)
        samples = problem.sample_grid(config.n, config.n_boundary)
        state = initial_state(config, spec_s, spec_d)
        train_epoch(state, config, problem, spec_s, spec_d, samples)
        broken = state.solver.params.copy()
        broken[0] = np.nan
        state.solver = dataclasses.replace(state.solver, params=broken)
        with self.assertRaises(DivergenceError) as ctx:
            train_epoch(state, config, problem, spec_s, spec_d, samples)
        self.assertIs(ctx.exception.last_good, state)
        self.assertEqual(ctx.exception.epoch, 1)
        self.assertEqual(state.epoch, 1)
        self.assertEqual(len(state.history), 1)

    def test_evaluate_analytic_network_columns(self):
        problem = DistributedControl2DPoisson()
        spec = MlpSpec(2, 2, 1, 3)
        points = problem.sample_grid(4, 4).interior
        table, metrics = evaluate_network(problem, spec, init_params(spec, 0), points)
        for column in ('x', 'y', 'u_pred', 'u_analytic', 'u_error', 'f_pred', 'f_error', 'residual'):
            self.assertIn(column, table.columns)
        self.assertEqual(len(table), 16)
        self.assertAlmostEqual(metrics['max_u_error'], table['u_error'].max())
        self.assertIn('max_f_error', metrics)

    def test_plateau_epoch(self):
        self.assertEqual(plateau_epoch([10.0, 5.0, 1.04, 1.02, 1.0]), 2)
        self.assertEqual(plateau_epoch([3.0]), 0)
        self.assertIsNone(plateau_epoch([]))


if __name__ == '__main__':
    unittest.main()
