import json
import os
import tempfile
import unittest
import warnings

import numpy as np

from pan.exceptions import (
    ConditionFailedError,
    ConfigError,
    ContractViolationError,
    DomainError,
    EmptyBandError,
    NonSmoothGradientWarning,
    SingularSystemError
)
from pan.linear import (
    LinearControlProblem,
    PapConfig,
    PapPoint,
    Region,
    admissible_objective_band,
    anchor,
    condition_number,
    equivalent_lambda,
    evaluate_objective,
    evaluate_pap,
    evaluate_penalty,
    evaluate_remainder,
    exact_solution,
    omega_upper_bound,
    pap_gradient,
    penalty_gradient,
    penalty_hessian,
    penalty_solution,
    theorem_condition,
    toy_problem
)

J_ANCHOR = 40 / 49
R_ANCHOR = 64 / 49


def central_difference(f, x, h=1e-6):
    gradient = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        gradient[i] = (f(x + step) - f(x - step)) / (2 * h)
    return gradient


class TestLinearControlProblem(unittest.TestCase):

    def test_toy_dimensions(self):
        problem = toy_problem()
        self.assertEqual((problem.n, problem.m), (1, 1))
        self.assertEqual(problem.rho, 1.0)

    def test_non_positive_rho(self):
        with self.assertRaises(ContractViolationError):
            LinearControlProblem(A=[[1.0]], K=[[2.0]], b=[2.0], rho=0.0)

    def test_more_controls_than_states(self):
        with self.assertRaises(ContractViolationError):
            LinearControlProblem(A=[[1.0]], K=[[1.0], [2.0]], b=[1.0], rho=1.0)

    def test_mismatched_data(self):
        with self.assertRaises(ContractViolationError):
            LinearControlProblem(A=[[1.0]], K=[[2.0]], b=[1.0, 2.0], rho=1.0)

    def test_rows_must_span(self):
        with self.assertRaises(SingularSystemError) as ctx:
            LinearControlProblem(A=[[1.0, 0.0]], K=[[1.0, 0.0]], b=[1.0], rho=1.0)
        self.assertLess(ctx.exception.smallest_singular_value, 1e-10)

    def test_point_dimension_check(self):
        with self.assertRaises(ContractViolationError):
            evaluate_objective(toy_problem(), PapPoint([1.0, 2.0], [0.0]))

    def test_from_dict(self):
        problem = LinearControlProblem.from_dict({'schema_version': 1, 'A': [[1.0]], 'K': [[2.0]],
                                                  'b': [2.0], 'rho': 1.0})
        self.assertAlmostEqual(exact_solution(problem).u[0], 0.4, places=12)

    def test_from_dict_missing_key(self):
        with self.assertRaises(ConfigError):
            LinearControlProblem.from_dict({'A': [[1.0]], 'K': [[2.0]], 'b': [2.0]})

    def test_from_dict_bad_version(self):
        with self.assertRaises(ConfigError):
            LinearControlProblem.from_dict({'schema_version': 2, 'A': [[1.0]], 'K': [[2.0]], 'b': [2.0], 'rho': 1})

    def test_load_reports_position(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'broken.json')
            with open(path, 'w') as f:
                f.write('{\n  "A": [[1.0]],\n  "K": oops\n}')
            with self.assertRaises(ConfigError) as ctx:
                LinearControlProblem.load(path)
            self.assertIn(':3:', str(ctx.exception))

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'toy.json')
            with open(path, 'w') as f:
                json.dump({'schema_version': 1, 'A': [[1.0]], 'K': [[2.0]], 'b': [2.0], 'rho': 1.0}, f)
            problem = LinearControlProblem.load(path)
            self.assertEqual(problem.m, 1)


class TestClosedForms(unittest.TestCase):

    def setUp(self):
        self.problem = toy_problem()

    def assertPoint(self, point, u, y, tolerance=1e-10):
        self.assertAlmostEqual(point.u[0], u, delta=tolerance)
        self.assertAlmostEqual(point.y[0], y, delta=tolerance)

    def test_exact_solution(self):
        self.assertPoint(exact_solution(self.problem), 0.4, 0.8)

    def test_penalty_solutions(self):
        self.assertPoint(penalty_solution(self.problem, 0.5), 6 / 7, 4 / 7)
        self.assertPoint(penalty_solution(self.problem, 5.0), 6 / 13, 10 / 13)

    def test_exact_solution_satisfies_constraint(self):
        point = exact_solution(self.problem)
        self.assertAlmostEqual(evaluate_remainder(self.problem, point), 0.0, places=20)
        self.assertAlmostEqual(evaluate_objective(self.problem, point), 1.6, places=12)

    def test_penalty_solution_is_stationary(self):
        for lam in (0.1, 1.0, 37.0):
            point = penalty_solution(self.problem, lam)
            self.assertLess(np.linalg.norm(penalty_gradient(self.problem, point, lam)), 1e-12)

    def test_penalty_weight_must_be_positive(self):
        with self.assertRaises(ContractViolationError):
            penalty_solution(self.problem, 0.0)

    def test_anchor(self):
        point, objective, remainder = anchor(self.problem, 0.5)
        self.assertPoint(point, 6 / 7, 4 / 7)
        self.assertAlmostEqual(objective, J_ANCHOR, places=12)
        self.assertAlmostEqual(remainder, R_ANCHOR, places=12)

    def test_penalty_limit(self):
        target = exact_solution(self.problem)
        distances = [penalty_solution(self.problem, 10.0 ** j).distance(target) for j in range(9)]
        for before, after in zip(distances, distances[1:]):
            self.assertLess(after, before)
        self.assertLess(distances[-1], 1e-6)

    def test_larger_problem_is_stationary(self):
        rng = np.random.default_rng(3)
        problem = LinearControlProblem(A=rng.normal(size=(5, 4)), K=rng.normal(size=(2, 4)),
                                       b=rng.normal(size=5), rho=0.3)
        point = penalty_solution(problem, 2.0)
        self.assertLess(np.linalg.norm(penalty_gradient(problem, point, 2.0)), 1e-10)
        exact = exact_solution(problem)
        self.assertLess(evaluate_remainder(problem, exact), 1e-20)

    def test_hessian_spd_and_worsening(self):
        conditions = []
        for lam in (0.5, 5.0, 50.0, 500.0):
            hessian = penalty_hessian(self.problem, lam)
            np.testing.assert_allclose(hessian, hessian.T)
            self.assertGreater(np.linalg.eigvalsh(hessian).min(), 0.0)
            conditions.append(condition_number(self.problem, lam))
        self.assertEqual(conditions, sorted(conditions))

    def test_objective_remainder_tradeoff(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, n + 1))
            problem = LinearControlProblem(A=rng.normal(size=(n, n)) + 2 * np.eye(n), K=rng.normal(size=(m, n)),
                                           b=rng.normal(size=n), rho=float(rng.uniform(0.1, 2.0)))
            lam = float(rng.uniform(0.1, 10.0))
            optimum = penalty_solution(problem, lam)
            j_opt, r_opt = evaluate_objective(problem, optimum), evaluate_remainder(problem, optimum)
            point = PapPoint(optimum.u + rng.normal(scale=0.5, size=n), optimum.y + rng.normal(scale=0.5, size=m))
            j, r = evaluate_objective(problem, point), evaluate_remainder(problem, point)
            if j < j_opt:
                self.assertGreater(r, r_opt)
            if r < r_opt:
                self.assertGreater(j, j_opt)


class TestPenaltyAdversarialFunctional(unittest.TestCase):

    def setUp(self):
        self.problem = toy_problem()
        self.config = PapConfig(5.0, 0.5, 1.0)

    def test_config_validation(self):
        with self.assertRaises(ContractViolationError):
            PapConfig(0.5, 5.0, 1.0)
        with self.assertRaises(ContractViolationError):
            PapConfig(5.0, 0.5, 0.0)
        with self.assertRaises(ContractViolationError):
            PapConfig(5.0, 0.5, 1.0, 0)

    def test_value_at_exact_solution(self):
        evaluation = evaluate_pap(self.problem, self.config, J_ANCHOR, exact_solution(self.problem))
        self.assertEqual(evaluation.region, Region.OMEGA1)
        self.assertAlmostEqual(evaluation.adversarial_value, 1.6 + (1.6 - J_ANCHOR) ** 2, places=12)
        self.assertAlmostEqual(evaluation.adversarial_value, 2.214144, places=5)

    def test_anchor_lies_in_omega2(self):
        point, objective, _ = anchor(self.problem, 0.5)
        evaluation = evaluate_pap(self.problem, self.config, objective, point)
        self.assertEqual(evaluation.region, Region.OMEGA2)
        self.assertAlmostEqual(evaluation.adversarial_value, 200 / 49, places=12)

    def test_omega2_matches_penalty(self):
        point = PapPoint([0.0], [0.0])
        evaluation = evaluate_pap(self.problem, self.config, J_ANCHOR, point)
        self.assertEqual(evaluation.region, Region.OMEGA1)
        point = PapPoint([1.5], [0.2])
        evaluation = evaluate_pap(self.problem, self.config, J_ANCHOR, point)
        self.assertEqual(evaluation.region, Region.OMEGA2)
        self.assertEqual(evaluation.adversarial_value, evaluate_penalty(self.problem, point, 5.0))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            config = PapConfig(5.0, 0.5, float(rng.uniform(0.1, 10.0)), int(rng.integers(2, 6)))
            x = rng.uniform(-1.0, 2.0, size=2)

            def value(v):
                return evaluate_pap(self.problem, config, J_ANCHOR, PapPoint.from_vector(v, 1)).adversarial_value

            analytic = pap_gradient(self.problem, config, J_ANCHOR, PapPoint.from_vector(x, 1))
            numeric = central_difference(value, x)
            self.assertLess(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1.0), 1e-6)

    def test_gradient_is_scaled_penalty_gradient(self):
        config = PapConfig(5.0, 0.5, 3.0)
        point = exact_solution(self.problem)
        objective = evaluate_objective(self.problem, point)
        scale = 1 + 2 * config.omega * (objective - J_ANCHOR)
        lam = equivalent_lambda(config, objective, J_ANCHOR)
        np.testing.assert_allclose(pap_gradient(self.problem, config, J_ANCHOR, point),
                                   scale * penalty_gradient(self.problem, point, lam), rtol=1e-12)

    def test_kink_warning(self):
        point, objective, _ = anchor(self.problem, 0.5)
        with self.assertWarns(NonSmoothGradientWarning):
            pap_gradient(self.problem, PapConfig(5.0, 0.5, 1.0, 1), objective, point)

    def test_no_warning_for_smooth_power(self):
        point, objective, _ = anchor(self.problem, 0.5)
        with warnings.catch_warnings():
            warnings.simplefilter('error')
            pap_gradient(self.problem, self.config, objective, point)

    def test_equivalent_lambda(self):
        config = PapConfig(5.0, 0.5, 100.0)
        value = equivalent_lambda(config, 1.6, J_ANCHOR)
        self.assertAlmostEqual(value, 5.0 / (1 + 200 * (1.6 - J_ANCHOR)), places=12)
        self.assertAlmostEqual(value, 0.0317, delta=5e-5)
        self.assertEqual(equivalent_lambda(config, J_ANCHOR, J_ANCHOR), 5.0)

    def test_equivalent_lambda_domain(self):
        with self.assertRaises(DomainError):
            equivalent_lambda(PapConfig(5.0, 0.5, 1.0, 3), 1.6, J_ANCHOR)
        with self.assertRaises(DomainError):
            equivalent_lambda(self.config, 0.5, J_ANCHOR)


class TestConstraintGuarantees(unittest.TestCase):

    def setUp(self):
        self.problem = toy_problem()

    def test_condition_holds(self):
        condition = theorem_condition(self.problem, 5.0, 0.5)
        self.assertTrue(condition.holds)
        self.assertAlmostEqual(condition.margin, 200 / 49 - 1.6, places=12)
        self.assertAlmostEqual(condition.margin, 2.481633, places=6)

    def test_condition_fails_for_small_lambda1(self):
        condition = theorem_condition(self.problem, 0.6, 0.5)
        self.assertFalse(condition.holds)
        self.assertLess(condition.margin, 0.0)
        with self.assertRaises(ConditionFailedError):
            omega_upper_bound(self.problem, 0.6, 0.5)

    def test_condition_needs_constraint_image(self):
        problem = LinearControlProblem(A=[[1.0]], K=[[2.0]], b=[0.0], rho=1.0)
        self.assertFalse(theorem_condition(problem, 5.0, 0.5).holds)

    def test_omega_bound(self):
        bound = omega_upper_bound(self.problem, 5.0, 0.5)
        self.assertTrue(bound.bounded)
        gap = 1.6 - J_ANCHOR
        self.assertAlmostEqual(bound.value, (5 * R_ANCHOR - 2 * gap) / (2 * gap ** 2), places=10)
        self.assertAlmostEqual(bound.value, 4.0408, delta=1e-3)

    def test_omega_bound_grows_with_lambda1(self):
        bounds = [omega_upper_bound(self.problem, lam, 0.5).value for lam in (5.0, 50.0, 500.0)]
        self.assertEqual(bounds, sorted(bounds))

    def test_omega_bound_for_tiny_lambda2(self):
        bound = omega_upper_bound(self.problem, 5.0, 1e-8)
        self.assertTrue(bound.bounded)
        self.assertTrue(np.isfinite(bound.value))
        self.assertGreater(bound.value, 0.0)

    def test_omega_bound_for_tiny_rho(self):
        bound = omega_upper_bound(toy_problem(rho=1e-8), 5.0, 0.5)
        self.assertTrue(np.isfinite(bound.value))
        self.assertGreater(bound.value, 0.0)

    def test_objective_band(self):
        config = PapConfig(5.0, 0.5, 1.0)
        lower, upper = admissible_objective_band(self.problem, config, J_ANCHOR, R_ANCHOR, 0.0)
        delta = R_ANCHOR
        self.assertEqual(lower, J_ANCHOR)
        self.assertAlmostEqual(upper, J_ANCHOR + 5 * delta / (1 + np.sqrt(1 + 10 * delta)), places=12)
        self.assertAlmostEqual(upper, 2.19124, places=4)

    def test_objective_band_degenerates(self):
        config = PapConfig(5.0, 0.5, 1.0)
        lower, upper = admissible_objective_band(self.problem, config, J_ANCHOR, 0.0, 0.0)
        self.assertEqual(lower, upper)
        lower, upper = admissible_objective_band(self.problem, config, J_ANCHOR, R_ANCHOR, R_ANCHOR)
        self.assertEqual((lower, upper), (J_ANCHOR, J_ANCHOR))

    def test_objective_band_empty(self):
        config = PapConfig(5.0, 0.5, 1.0)
        with self.assertRaises(EmptyBandError):
            admissible_objective_band(self.problem, config, J_ANCHOR, R_ANCHOR, 2.0)
        with self.assertRaises(DomainError):
            admissible_objective_band(self.problem, PapConfig(5.0, 0.5, 1.0, 3), J_ANCHOR, R_ANCHOR, 0.0)


if __name__ == '__main__':
    unittest.main()
