import numpy as np
from django.test import SimpleTestCase

from pulseshape.builtins import builtin
from sequences.schedule import TABLE1_SEQUENCES, parse_sequence
from sequences.table import load_expected
from spinmodel.chain import EVEN, ODD

from .exceptions import SamplingError
from .frame import RotationTrajectory, harmonics, refocuses, refocusing_check, rotation_trajectory


class RotationTrajectoryTests(SimpleTestCase):

    def setUp(self):
        self.s1 = builtin("S1")

    def test_idle(self):
        trajectory = rotation_trajectory(parse_sequence("I I", self.s1), ODD)
        self.assertEqual(len(trajectory), 512)
        np.testing.assert_allclose(trajectory.q, np.broadcast_to(np.eye(3), trajectory.q.shape), atol=1e-15)

    def test_end_of_pi_pulse(self):
        trajectory = rotation_trajectory(parse_sequence("X1 I", self.s1), ODD)
        # first sample of the idle interval is the state after the pulse
        np.testing.assert_allclose(trajectory.q[256], np.diag([1.0, -1.0, -1.0]), atol=1e-9)

    def test_unpulsed_sublattice(self):
        trajectory = rotation_trajectory(parse_sequence("X1", self.s1), EVEN)
        np.testing.assert_allclose(trajectory.q, np.broadcast_to(np.eye(3), trajectory.q.shape), atol=1e-15)

    def test_orthogonal(self):
        trajectory = rotation_trajectory(parse_sequence(TABLE1_SEQUENCES[4], builtin("Q1")), ODD)
        gram = np.einsum("jab,jcb->jac", trajectory.q, trajectory.q)
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-8)
        np.testing.assert_allclose(np.linalg.det(trajectory.q), 1.0, atol=1e-8)

    def test_periodic_for_refocusing_schedule(self):
        schedule = parse_sequence(TABLE1_SEQUENCES[4], self.s1)
        once = rotation_trajectory(schedule, ODD)
        twice = rotation_trajectory(parse_sequence(" ".join([TABLE1_SEQUENCES[4]] * 2), self.s1), ODD)
        np.testing.assert_allclose(twice.q[len(once):], once.q, atol=1e-8)

    def test_too_few_samples(self):
        with self.assertRaises(SamplingError):
            rotation_trajectory(parse_sequence("X1", self.s1), ODD, samples=32)


class HarmonicsTests(SimpleTestCase):

    def setUp(self):
        self.s1 = builtin("S1")

    def test_idle(self):
        table = harmonics(rotation_trajectory(parse_sequence("I", self.s1), ODD))
        np.testing.assert_allclose(table.c[0], np.eye(3), atol=1e-15)
        for m in range(1, table.m_max + 1):
            np.testing.assert_allclose(table.c[m], np.zeros((3, 3)), atol=1e-15)
            np.testing.assert_allclose(table.c[-m], np.zeros((3, 3)), atol=1e-15)

    def test_zeroth_harmonic_is_time_average(self):
        trajectory = rotation_trajectory(parse_sequence("X1 Y2", self.s1), ODD)
        table = harmonics(trajectory)
        np.testing.assert_allclose(table.c[0], trajectory.q.mean(axis=0), atol=1e-14)
        self.assertAlmostEqual(table.main_frequency, np.pi)

    def test_two_pulses_average_z(self):
        table = harmonics(rotation_trajectory(parse_sequence("X1 X1", builtin("gauss")), ODD))
        self.assertLess(abs(table.c[0][2, 2]), 1e-6)

    def test_reconstruction_improves_with_cutoff(self):
        trajectory = rotation_trajectory(parse_sequence("X1 Y2 ~X1 ~Y2", self.s1), ODD)
        coarse, fine = harmonics(trajectory, 16), harmonics(trajectory, 64)
        self.assertLess(fine.reconstruction_residual, coarse.reconstruction_residual)
        self.assertLess(fine.reconstruction_residual, 1e-3)

    def test_sampling_errors(self):
        trajectory = rotation_trajectory(parse_sequence("X1", self.s1), ODD)
        with self.assertRaises(SamplingError):
            harmonics(trajectory, 128)
        skewed = RotationTrajectory(
            parity=ODD, times=trajectory.times ** 2, q=trajectory.q, period=trajectory.period,
        )
        with self.assertRaises(SamplingError):
            harmonics(skewed)

    def test_csv(self):
        table = harmonics(rotation_trajectory(parse_sequence("I", self.s1), ODD), 2)
        lines = table.to_csv().splitlines()
        self.assertEqual(len(lines), 6)
        self.assertEqual(lines[0].split(",")[:3], ["m", "xx_re", "xx_im"])
        self.assertEqual(lines[3].split(",")[:2], ["0", "1"])


class RefocusingCheckTests(SimpleTestCase):

    def check(self, text, shape, parity):
        return harmonics(rotation_trajectory(parse_sequence(text, shape), parity))

    def test_eight_pulse_sequence_protects_every_site(self):
        for name in ("S1", "Q1"):
            for parity in (ODD, EVEN):
                table = self.check(TABLE1_SEQUENCES[8], builtin(name), parity)
                self.assertLess(np.max(refocusing_check(table)), 1e-6, (name, parity))

    def test_single_pulse(self):
        self.assertTrue(refocuses(self.check("X1", builtin("S1"), ODD)))
        self.assertFalse(refocuses(self.check("X1", builtin("gauss"), ODD)))

    def test_idle(self):
        residual = refocusing_check(self.check("I", builtin("S1"), ODD))
        np.testing.assert_allclose(residual, [0.0, 0.0, 1.0], atol=1e-15)

    def test_agrees_with_bath_orders(self):
        expected = load_expected()
        for name in ("gauss", "S1", "Q1"):
            shape = builtin(name)
            for sid, text in TABLE1_SEQUENCES.items():
                schedule = parse_sequence(text, shape)
                protected = all(
                    refocuses(harmonics(rotation_trajectory(schedule, parity)))
                    for parity in schedule.pulsed_parities()
                )
                order, _ = expected[(name, sid, "bath")]
                self.assertEqual(protected, order >= 1, (name, text))
