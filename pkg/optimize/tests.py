import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from pulseshape.builtins import PUBLISHED, builtin, hermite_shape
from sequences.experiments import bb1_error, bb1_sweep, fit_slope
from spinmodel.chain import preset

from .design import (
    DesignGoal, calibrate_hermite, certify_shape, design_pulse, eliminate_constraints,
    first_order_weight, gradient, objective,
)
from .exceptions import EliminationError, InfeasibleGoalError

QUICK = {**settings.REFOCUS, "ANNEAL_SWEEPS": 5, "DESCENT_ITERATIONS": 2, "POLISH_EVALUATIONS": 10}
HOPELESS = {**settings.REFOCUS, "ANNEAL_SWEEPS": 1, "DESCENT_ITERATIONS": 0, "POLISH_EVALUATIONS": 1}


def coefficients(shape):
    return np.concatenate([[shape.a0], shape.cosines()])


class EliminateConstraintsTests(SimpleTestCase):

    def test_s1(self):
        full = eliminate_constraints([-1.2053194466, 0.4796460175], DesignGoal(K=1, L=1, M=3))
        self.assertAlmostEqual(full[0], 0.5)
        self.assertAlmostEqual(full[3], 0.2256734291, places=10)

    def test_single_harmonic(self):
        full = eliminate_constraints([], DesignGoal(K=0, L=1, M=1))
        np.testing.assert_allclose(full, [0.5, -0.5])

    def test_s2(self):
        a = PUBLISHED["S2"]["A"]
        full = eliminate_constraints(a[:2], DesignGoal(K=1, L=2, M=4))
        np.testing.assert_allclose(full[3:], a[2:], atol=1e-9)

    def test_end_points_vanish(self):
        goal = DesignGoal(K=1, L=2, M=5)
        full = eliminate_constraints([0.3, -0.2, 0.1], goal)
        m = np.arange(1, 6)
        self.assertAlmostEqual(full[0] + full[1:].sum(), 0.0)
        self.assertAlmostEqual(float(m ** 2 @ full[1:]), 0.0)

    def test_wrong_length(self):
        with self.assertRaises(EliminationError):
            eliminate_constraints([0.1], DesignGoal(K=1, L=1, M=3))

    def test_infeasible_goal(self):
        with self.assertRaises(InfeasibleGoalError):
            DesignGoal(K=2, L=1, M=2)


class ObjectiveTests(SimpleTestCase):

    def test_published_shapes_meet_their_goals(self):
        self.assertLess(objective(coefficients(builtin("S1")), DesignGoal(K=1, L=1, M=3)), 1e-15)
        self.assertLess(objective(coefficients(builtin("Q1")), DesignGoal(K=2, L=1, M=4)), 1e-15)

    def test_gaussian_does_not(self):
        gauss = builtin("gauss")
        goal = DesignGoal(K=1, L=1, M=gauss.harmonics)
        self.assertGreater(objective(coefficients(gauss), goal), 1e-4)

    def test_gradient_is_consistent_under_refinement(self):
        goal = DesignGoal(K=1, L=1, M=3)

        def f(free):
            return objective(eliminate_constraints(free, goal), goal)

        p = np.array([-1.1, 0.4])
        coarse, fine = gradient(f, p, 1e-4), gradient(f, p, 5e-5)
        np.testing.assert_allclose(fine, coarse, rtol=1e-2, atol=1e-8)


class DesignPulseTests(SimpleTestCase):

    def _check_goal(self, goal, minimum=3):
        shapes = []
        for seed in range(5):
            result = design_pulse(goal, seed)
            if not result.converged:
                continue
            self.assertLess(result.objective, 1e-15)
            self.assertEqual(result.shape.claimed_K, goal.K)
            self.assertTrue(certify_shape(result.shape, angle=goal.angle).passed, f"seed {seed}")
            shapes.append(result.shape)
        self.assertGreaterEqual(len(shapes), minimum)
        return shapes

    def test_first_order_goal(self):
        self._check_goal(DesignGoal(K=1, L=1, M=3))

    def test_second_order_goal(self):
        self._check_goal(DesignGoal(K=2, L=1, M=4))

    def test_two_pi_goal_drives_bb1(self):
        two_pi = self._check_goal(DesignGoal(angle=2 * np.pi, K=2, L=1, M=5), minimum=1)[0]
        self.assertAlmostEqual(two_pi.rotation_angle(), 2 * np.pi)
        q1 = builtin("Q1")
        self.assertLess(bb1_error(q1, two_pi, 0.0), 1e-8)
        xs, ys = zip(*bb1_sweep(q1, two_pi, np.geomspace(0.01, 0.1, 5)))
        self.assertAlmostEqual(fit_slope(xs, ys), 3.0, delta=0.4)

    @override_settings(REFOCUS=QUICK)
    def test_deterministic(self):
        goal = DesignGoal(K=1, L=1, M=3, steps=200)
        first, second = design_pulse(goal, 11), design_pulse(goal, 11)
        self.assertEqual(first.shape.a, second.shape.a)
        self.assertEqual(first.objective, second.objective)

    @override_settings(REFOCUS=HOPELESS)
    def test_no_convergence_keeps_best_so_far(self):
        result = design_pulse(DesignGoal(K=2, L=1, M=4, steps=200), 3)
        self.assertFalse(result.converged)
        self.assertGreater(result.objective, 1e-15)
        self.assertAlmostEqual(result.shape.rotation_angle(), np.pi)

    @override_settings(REFOCUS=QUICK)
    def test_convergence_log(self):
        result = design_pulse(DesignGoal(K=1, L=1, M=3, steps=200), 0)
        lines = result.log_csv().splitlines()
        self.assertEqual(lines[0], "iteration,temperature,objective")
        self.assertEqual(lines[1].split(",")[1], "1")
        self.assertGreaterEqual(len(lines), 6)


class CertifyShapeTests(SimpleTestCase):

    def test_published_shapes(self):
        for name in PUBLISHED:
            certificate = certify_shape(builtin(name))
            self.assertTrue(certificate.passed, certificate.to_dict())
            self.assertEqual(certificate.order, PUBLISHED[name]["K"])

    def test_gaussian_fails(self):
        certificate = certify_shape(builtin("gauss"))
        self.assertFalse(certificate.passed)
        self.assertTrue(certificate.smooth)
        self.assertGreater(max(certificate.residuals[1].values()), 1e-3)

    def test_zero_coupling(self):
        certificate = certify_shape(builtin("S1"), model=preset("none"))
        self.assertTrue(certificate.passed)
        self.assertEqual(max(certificate.residuals[1].values()), 0.0)

    def test_clusters_reach_two_beyond_order(self):
        certificate = certify_shape(builtin("Q1"))
        self.assertIn("4e", certificate.residuals[2])


class HermiteCalibrationTests(SimpleTestCase):

    def test_weight(self):
        self.assertLess(abs(first_order_weight(builtin("S1"))), 1e-7)
        self.assertGreater(abs(first_order_weight(builtin("gauss"))), 1e-3)

    def test_calibrated_pulse_refocuses(self):
        sigma = settings.REFOCUS["HERM_SIGMA"]
        beta = calibrate_hermite(sigma)
        self.assertTrue(0 < beta < 1.8)
        self.assertTrue(certify_shape(builtin("herm")).passed)

    def test_calibration_holds_across_widths(self):
        for sigma in (1 / 6, 1 / 10):
            beta = calibrate_hermite(sigma)
            self.assertTrue(0 < beta < 1.8, sigma)
            shape = hermite_shape(beta, sigma)
            self.assertLess(abs(first_order_weight(shape)), 1e-9)
            self.assertTrue(certify_shape(shape, K=1).passed, sigma)
