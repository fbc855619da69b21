"""
Full-length training runs. They take hours, so they only run with
``PAN_LONG_TESTS=1`` in the environment.
"""
import os
import unittest

import numpy as np

from pan.training import load_config, train

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')
LONG = os.environ.get('PAN_LONG_TESTS') == '1'
SEEDS = range(3)


def run(name: str, seed: int = 0) -> dict:
    return train(load_config(os.path.join(CONFIG_DIR, f'{name}.json')).with_seed(seed)).metrics


@unittest.skipUnless(LONG, 'set PAN_LONG_TESTS=1 to run full training runs')
class TestBoundaryControl(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.pan_runs = [run('ex1-pan', seed) for seed in SEEDS]

    def test_pan_recovers_solution_for_most_seeds(self):
        def recovered(m):
            solver, discriminator = m['solver'], m['discriminator']
            return (solver['max_u_error'] <= 0.15 and solver['max_laplacian_error'] <= 0.1
                    and discriminator['max_laplacian_error'] > solver['max_laplacian_error'])

        self.assertGreaterEqual(sum(recovered(m) for m in self.pan_runs), 2, self.pan_runs)

    def test_solver_adheres_to_constraint_better(self):
        solver = np.mean([m['solver']['residual_mse'] for m in self.pan_runs])
        discriminator = np.mean([m['discriminator']['residual_mse'] for m in self.pan_runs])
        self.assertLess(solver, discriminator)

    def test_penalty_alone_misses_solution(self):
        self.assertGreater(run('ex1-penalty')['solver']['max_u_error'], 0.5)


@unittest.skipUnless(LONG, 'set PAN_LONG_TESTS=1 to run full training runs')
class TestDistributedControl(unittest.TestCase):

    def assert_pan_beats_penalty(self, pan_name: str, penalty_name: str):
        pan = run(pan_name)
        penalty = run(penalty_name)['solver']
        solver, discriminator = pan['solver'], pan['discriminator']
        self.assertLess(solver['max_u_error'], penalty['max_u_error'])
        self.assertLess(solver['max_f_error'], penalty['max_f_error'])
        self.assertLess(solver['residual_mse'], penalty['residual_mse'])
        self.assertIsNotNone(discriminator['plateau_epoch'])
        self.assertIsNotNone(solver['plateau_epoch'])
        self.assertLess(discriminator['plateau_epoch'], solver['plateau_epoch'])

    def test_poisson(self):
        self.assert_pan_beats_penalty('ex2-pan-reduced', 'ex2-penalty-reduced')

    def test_allen_cahn(self):
        self.assert_pan_beats_penalty('ex3-pan-reduced', 'ex3-penalty-reduced')


if __name__ == '__main__':
    unittest.main()
