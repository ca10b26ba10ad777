import json
import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings
from scipy.integrate import trapezoid

from .builtins import BUILTIN_NAMES, PUBLISHED, builtin, gaussian_shape
from .exceptions import PulseDomainError, UnknownShapeError
from .shapes import OMEGA, PulseShape, dump_pulse, load_pulse


class EvaluateTests(SimpleTestCase):

    def test_s1_vanishes_at_ends(self):
        s1 = builtin("S1")
        self.assertLess(abs(s1.evaluate(0.0)), 1e-9)
        self.assertLess(abs(s1.evaluate(1.0)), 1e-9)

    def test_s1_midpoint(self):
        self.assertAlmostEqual(builtin("S1").evaluate(0.5), 1.9592920350, places=9)

    def test_zero_shape(self):
        shape = PulseShape(name="zero", a0=0.0)
        self.assertEqual(shape.evaluate(0.37), 0.0)

    def test_vectorized(self):
        s1 = builtin("S1")
        t = np.linspace(0, 1, 7)
        np.testing.assert_allclose(s1.evaluate(t), [s1.evaluate(x) for x in t])

    def test_symmetric_about_midpoint(self):
        t = np.linspace(0, 1, 41)
        for name in ("S1", "S2", "Q1", "Q2", "gauss"):
            v = builtin(name).evaluate(t)
            np.testing.assert_allclose(v, v[::-1], atol=1e-12)

    def test_outside_interval(self):
        with self.assertRaises(PulseDomainError):
            builtin("S1").evaluate(1.5)
        with self.assertRaises(PulseDomainError):
            builtin("S1").evaluate(-0.1)


class SmoothnessTests(SimpleTestCase):

    def test_published_shapes_are_smooth(self):
        for name in PUBLISHED:
            shape = builtin(name)
            self.assertEqual(len(shape.smoothness_residuals()), shape.smoothness_L)
            for value in shape.smoothness_residuals():
                self.assertLess(abs(value), 1e-8, name)
            self.assertTrue(shape.is_smooth())

    def test_single_harmonic(self):
        shape = PulseShape(name="h1", a0=0.5, a=(-0.5,), smoothness_L=1)
        self.assertEqual(shape.smoothness_residuals(), [0.0])

    def test_residuals_carry_the_derivative_sign(self):
        shape = PulseShape(name="h2", a0=0.5, a=(-0.25, 0.5), smoothness_L=2)
        first, second = shape.smoothness_residuals()
        self.assertAlmostEqual(first, 0.75)
        self.assertAlmostEqual(second, -(1 * -0.25 + 4 * 0.5))
        # V″(0) / Ω² = −Σ m² a_m
        h = 1e-4
        numeric = (shape.evaluate(2 * h) - 2 * shape.evaluate(h) + shape.evaluate(0)) / h ** 2
        self.assertAlmostEqual(numeric / OMEGA ** 2, second, places=2)

    def test_end_derivatives_vanish(self):
        # second derivative by finite differences, in units of Ω²
        s2 = builtin("S2")
        h = 1e-4
        second = (s2.evaluate(2 * h) - 2 * s2.evaluate(h) + s2.evaluate(0.0)) / h ** 2
        self.assertLess(abs(second) / OMEGA ** 2, 1e-3)

    def test_gaussian_fit_vanishes_at_ends(self):
        self.assertTrue(builtin("gauss").is_smooth())


class BuiltinTests(SimpleTestCase):

    def test_s1_coefficients(self):
        s1 = builtin("S1")
        self.assertEqual(s1.a0, 0.5)
        self.assertEqual(s1.a, (-1.2053194466, 0.4796460175, 0.2256734291))
        self.assertEqual((s1.smoothness_L, s1.claimed_K), (1, 1))

    def test_q2_coefficients(self):
        q2 = builtin("Q2")
        self.assertEqual(q2.a, (-1.0965122417, 1.5309957409, -1.1470791601, 0.0020722004, 0.2105234605))
        self.assertEqual((q2.smoothness_L, q2.claimed_K), (2, 2))

    def test_gaussian_is_pi_pulse(self):
        for sigma in (1 / 10, 1 / 8, 1 / 6):
            shape = gaussian_shape(sigma)
            self.assertAlmostEqual(shape.rotation_angle(), np.pi, delta=1e-9)
            self.assertEqual(shape.claimed_K, 0)

    def test_unknown_name(self):
        with self.assertRaises(UnknownShapeError):
            builtin("sinc")

    def test_names(self):
        self.assertEqual(set(BUILTIN_NAMES), set(PUBLISHED) | {"gauss", "herm"})

    def test_shifted_convention_flag(self):
        overrides = {**settings.REFOCUS, "PULSE_CONVENTION": "shifted"}
        with override_settings(REFOCUS=overrides):
            shifted = builtin("S1")
        self.assertAlmostEqual(shifted.evaluate(0.1), builtin("S1").evaluate(0.6), places=12)


class RotationAngleTests(SimpleTestCase):

    def test_pi_pulses(self):
        for name in PUBLISHED:
            self.assertEqual(builtin(name).rotation_angle(), np.pi)

    def test_matches_quadrature(self):
        t = np.linspace(0, 1, 2001)
        area = trapezoid(OMEGA * builtin("S1").evaluate(t), t)
        self.assertAlmostEqual(area, np.pi, delta=1e-9)

    def test_other_angles(self):
        self.assertAlmostEqual(PulseShape(name="a", a0=1.0).rotation_angle(), 2 * np.pi)
        self.assertAlmostEqual(PulseShape(name="b", a0=0.25).rotation_angle(), np.pi / 2)


class DerivedShapeTests(SimpleTestCase):

    def test_rescaled(self):
        shape = builtin("gauss").rescaled(2 * np.pi)
        self.assertAlmostEqual(shape.rotation_angle(), 2 * np.pi)
        self.assertAlmostEqual(shape.evaluate(0.5), 2 * builtin("gauss").evaluate(0.5))

    def test_compressed_plays_twice(self):
        q1 = builtin("Q1")
        twice = q1.compressed(2)
        self.assertAlmostEqual(twice.rotation_angle(), 2 * np.pi)
        for t in (0.1, 0.2, 0.35):
            self.assertAlmostEqual(twice.evaluate(t), 2 * q1.evaluate(2 * t), places=12)
            self.assertAlmostEqual(twice.evaluate(t + 0.5), 2 * q1.evaluate(2 * t), places=12)

    def test_shifted_is_half_period_translation(self):
        q1 = builtin("Q1")
        self.assertAlmostEqual(q1.shifted().evaluate(0.2), q1.evaluate(0.7), places=12)


class PulseFileTests(SimpleTestCase):

    def test_file_format(self):
        data = json.loads(dump_pulse(builtin("Q1")))
        self.assertEqual(set(data), {"name", "angle_over_pi", "L", "K", "A", "B"})
        self.assertEqual(data["angle_over_pi"], 1.0)
        self.assertEqual(data["A"][0], -1.1374003264)

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "s2.json"
            path.write_text(dump_pulse(builtin("S2")))
            self.assertEqual(load_pulse(path), builtin("S2"))

    def test_malformed(self):
        with self.assertRaises(PulseDomainError):
            PulseShape.from_dict({"angle_over_pi": 1})
