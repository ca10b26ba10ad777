import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from matcore.exceptions import CapacityError
from pulseshape.builtins import builtin
from spinmodel.chain import EVEN, ODD, ChainModel, ClusterSpec, preset

from .classify import classify_order, noise_floor
from .exceptions import AmbiguousOrderError, MissingPulseError, SearchBudgetError, SequenceParseError
from .experiments import bb1_chain_sweep, bb1_error, bb1_schedule, bb1_sweep, fit_slope, scaling_sweep
from .schedule import TABLE1_SEQUENCES, format_sequence, parse_sequence
from .search import canonical, search_sequences
from .table import TABLE1_MODELS, TABLE1_SHAPES, load_expected, reproduce_table1

FULL_ALPHABET = {"X1", "~X1", "Y1", "~Y1", "X2", "~X2", "Y2", "~Y2"}


class ParseSequenceTests(SimpleTestCase):

    def test_single_pulse(self):
        schedule = parse_sequence("X1")
        self.assertEqual(len(schedule), 1)
        pulse = schedule.intervals[0].odd
        self.assertEqual(pulse.phase, 0.0)
        self.assertEqual(pulse.sign, 1)
        self.assertIsNone(schedule.intervals[0].even)

    def test_table_sequence(self):
        schedule = parse_sequence(TABLE1_SEQUENCES[8])
        self.assertEqual(len(schedule), 8)
        second = schedule.intervals[1]
        self.assertIsNone(second.odd)
        self.assertAlmostEqual(second.even.phase, np.pi / 2)
        self.assertEqual(schedule.intervals[2].odd.sign, -1)
        self.assertEqual(schedule.pulsed_parities(), [ODD, EVEN])

    def test_idle(self):
        schedule = parse_sequence("I I")
        self.assertEqual(schedule.duration, 2.0)
        self.assertTrue(all(iv.is_idle for iv in schedule.intervals))

    def test_joint_group(self):
        interval = parse_sequence("X1+~Y2").intervals[0]
        self.assertEqual(interval.odd.phase, 0.0)
        self.assertEqual(interval.even.sign, -1)

    def test_errors_carry_position(self):
        with self.assertRaises(SequenceParseError) as ctx:
            parse_sequence("X1 Z2")
        self.assertEqual(ctx.exception.position, 3)
        with self.assertRaises(SequenceParseError) as ctx:
            parse_sequence("   ")
        self.assertEqual(ctx.exception.position, 0)
        with self.assertRaises(SequenceParseError):
            parse_sequence("X1+Y1")
        with self.assertRaises(SequenceParseError):
            parse_sequence("X3")

    def test_format_round_trip(self):
        for text in ("X1", "I I", "X1+~Y2 I ~X2", *TABLE1_SEQUENCES.values()):
            self.assertEqual(format_sequence(parse_sequence(text)), text)

    def test_shape_binding(self):
        s1 = builtin("S1")
        schedule = parse_sequence("X1 Y2").with_shape(s1)
        self.assertIs(schedule.intervals[1].even.shape, s1)
        with self.assertRaises(MissingPulseError):
            parse_sequence("X1").require_shape()


class ClassifyOrderTests(SimpleTestCase):

    def test_gaussian_single_pulse(self):
        report = classify_order(parse_sequence("X1"), builtin("gauss"), preset("ising"))
        self.assertEqual(report.order, 0)
        self.assertGreater(report.max_residual(1), 1e-3)

    def test_eight_pulse_sequence_is_sixth_order(self):
        report = classify_order(parse_sequence(TABLE1_SEQUENCES[8]), builtin("Q1"), preset("ising"))
        self.assertEqual(report.order, 6)

    def test_xxz_two_pulses(self):
        report = classify_order(parse_sequence("X1 X1"), builtin("Q1"), preset("xxz"))
        self.assertEqual(report.order, 0)
        self.assertGreater(report.attribution[1]["perp"], 1e-3)
        self.assertLess(report.attribution[1]["ising"], 1e-6)

    def test_zero_model(self):
        report = classify_order(parse_sequence("X1 Y2"), builtin("S1"), preset("none"), k_max=3)
        self.assertEqual(report.order, 3)
        for row in report.residuals.values():
            self.assertTrue(all(v == 0.0 for v in row.values()))

    def test_idle_does_not_refocus(self):
        report = classify_order(parse_sequence("I"), builtin("S1"), preset("ising"))
        self.assertEqual(report.order, 0)

    def test_bath_asterisk(self):
        report = classify_order(parse_sequence("X1"), builtin("S1"), preset("bath"))
        self.assertEqual(report.order, 0)
        self.assertEqual(report.pulsed_order, 1)
        self.assertTrue(report.asterisk)
        self.assertEqual(report.table_order, 1)

    def test_sign_and_sublattice_symmetry(self):
        s1, ising = builtin("S1"), preset("ising")
        orders = {
            text: classify_order(parse_sequence(text), s1, ising, attribution=False).order
            for text in ("X1 X1", "~X1 ~X1", "X2 X2")
        }
        self.assertEqual(len(set(orders.values())), 1, orders)

    def test_weak_residual_resolved_against_noise_floor(self):
        report = classify_order(parse_sequence("X1"), builtin("gauss"), ChainModel(jz=1e-4), steps=200)
        self.assertEqual(report.order, 0)
        self.assertLess(report.max_residual(1), 1e-3)
        self.assertLess(10 * report.noise_floor, report.max_residual(1))

    @override_settings(REFOCUS={**settings.REFOCUS, "NOISE_MARGIN": 1e300})
    def test_residual_inside_noise_band_is_ambiguous(self):
        with self.assertRaises(AmbiguousOrderError) as ctx:
            classify_order(parse_sequence("X1"), builtin("gauss"), ChainModel(jz=1e-4), steps=200)
        self.assertEqual(ctx.exception.order, 1)

    def test_noise_floor_is_small_for_smooth_pulses(self):
        schedule = parse_sequence("X1", builtin("S1"))
        floor = noise_floor(schedule, preset("ising"), ClusterSpec(2, ODD), 2, 2000)
        self.assertLess(floor, 1e-6)

    def test_stops_at_clusters_of_the_first_nonvanishing_order(self):
        report = classify_order(parse_sequence("X1"), builtin("S1"), preset("ising"), attribution=False)
        self.assertEqual(report.order, 1)
        self.assertEqual(set(report.residuals[1]), {"2o", "2e"})

    def test_four_pulse_sequence_is_fifth_order(self):
        report = classify_order(parse_sequence(TABLE1_SEQUENCES[4]), builtin("Q1"), preset("ising"),
                                attribution=False)
        self.assertEqual(report.order, 5)
        self.assertIsNotNone(report.noise_floor)

    def test_k_max_range(self):
        with self.assertRaises(CapacityError):
            classify_order(parse_sequence("X1"), builtin("S1"), preset("ising"), k_max=10)

    def test_report_dict(self):
        report = classify_order(parse_sequence("X1"), builtin("S1"), preset("ising"))
        data = report.to_dict()
        self.assertEqual(data["sequence"], "X1")
        self.assertEqual(data["shape"], "S1")
        self.assertEqual(data["order"], 1)
        self.assertEqual(len(data["residuals"]), len(report.residuals))
        self.assertEqual(data["clusters"], sorted(data["clusters"]))


class SearchTests(SimpleTestCase):

    def test_canonical_representative(self):
        self.assertEqual(canonical(("~Y2", "X1"), FULL_ALPHABET), ("Y1", "~X2"))
        self.assertEqual(canonical(("~X1", "~X1"), {"X1", "~X1"}), ("X1", "X1"))
        self.assertEqual(canonical(("Y1+X2",), {"X1+Y2", "Y1+X2"}), ("X1+Y2",))

    def test_single_pulse_q1(self):
        best = search_sequences(1, {"X1"}, builtin("Q1"), preset("ising"))
        self.assertEqual([text for text, _ in best], ["X1"])
        self.assertEqual(best[0][1].order, 2)

    def test_two_pulses_s1(self):
        best = search_sequences(2, {"X1", "~X1"}, builtin("S1"), preset("ising"))
        self.assertIn("X1 X1", [text for text, _ in best])
        self.assertTrue(all(report.order == 1 for _, report in best))

    def test_four_pulses_q1(self):
        best = search_sequences(4, FULL_ALPHABET, builtin("Q1"), preset("ising"), k_max=6)
        self.assertEqual(best[0][1].order, 5)
        self.assertTrue(all(report.order == 5 for _, report in best))
        target = " ".join(canonical(("X1", "Y2", "~X1", "~Y2"), FULL_ALPHABET))
        self.assertIn(target, [text for text, _ in best])

    def test_budget(self):
        with self.assertRaises(SearchBudgetError) as ctx:
            search_sequences(8, FULL_ALPHABET, builtin("Q1"), preset("ising"), budget=1000)
        self.assertEqual(ctx.exception.count, 8 ** 8)

    def test_unknown_token(self):
        with self.assertRaises(SequenceParseError):
            search_sequences(1, {"Z1"}, builtin("Q1"), preset("ising"))


class BB1Tests(SimpleTestCase):

    def setUp(self):
        self.q1 = builtin("Q1")
        self.q1_2pi = self.q1.compressed(2)
        self.gauss = builtin("gauss")
        self.gauss_2pi = self.gauss.rescaled(2 * np.pi)

    def test_schedule_phases(self):
        schedule = bb1_schedule(self.q1, self.q1_2pi, 0.05)
        phi = np.arccos(-0.25)
        phases = [iv.odd.phase for iv in schedule.intervals]
        np.testing.assert_allclose(phases, [0.0, phi, 3 * phi, phi])
        for iv in schedule.intervals:
            self.assertAlmostEqual(iv.odd.scale, 1.05)
        self.assertIs(schedule.intervals[2].odd.shape, self.q1_2pi)

    def test_no_mismatch_single_spin(self):
        self.assertLess(bb1_error(self.q1, self.q1_2pi, 0.0), 1e-8)

    def test_amplitude_error_is_cubic(self):
        rows = bb1_sweep(self.q1, self.q1_2pi, np.geomspace(0.01, 0.1, 5))
        xs, ys = zip(*rows)
        self.assertAlmostEqual(fit_slope(xs, ys), 3.0, delta=0.4)

    def test_gaussian_error_linear_in_coupling(self):
        rows = dict(bb1_chain_sweep(self.gauss, self.gauss_2pi, [0.025, 0.05]))
        self.assertAlmostEqual(rows[0.05] / rows[0.025], 2.0, delta=0.3)
        q_error = dict(bb1_chain_sweep(self.q1, self.q1_2pi, [0.05]))[0.05]
        self.assertLess(10 * q_error, rows[0.05])

    def test_missing_shape(self):
        with self.assertRaises(MissingPulseError):
            bb1_schedule(self.q1, None)

    def test_mismatch_range(self):
        with self.assertRaises(ValueError):
            bb1_sweep(self.q1, self.q1_2pi, [0.5])


class ScalingTests(SimpleTestCase):

    def test_fit_slope(self):
        xs = np.array([0.1, 0.2, 0.4])
        self.assertAlmostEqual(fit_slope(xs, 3 * xs ** 4), 4.0)

    def test_s1_four_pulse_sequence(self):
        schedule = parse_sequence(TABLE1_SEQUENCES[4], builtin("S1"))
        _, slope = scaling_sweep(schedule, preset("ising"), 3, np.geomspace(0.05, 0.4, 5))
        self.assertAlmostEqual(slope, 4.0, delta=0.5)

    def test_q1_eight_pulse_sequence(self):
        schedule = parse_sequence(TABLE1_SEQUENCES[8], builtin("Q1"))
        _, slope = scaling_sweep(schedule, preset("ising"), 6, np.geomspace(0.05, 0.4, 8))
        self.assertAlmostEqual(slope, 7.0, delta=0.5)


class TableTests(SimpleTestCase):

    def test_expected_grid(self):
        expected = load_expected()
        self.assertEqual(len(expected), 36)
        self.assertEqual(expected[("Q1", 4, "ising")], (5, False))
        self.assertEqual(expected[("S1", 8, "bath")], (1, False))
        self.assertEqual(expected[("gauss", 2, "bath")], (1, True))

    def test_ising_order_bounds_xxz_order(self):
        expected = load_expected()
        for shape in TABLE1_SHAPES:
            for sid in TABLE1_SEQUENCES:
                self.assertGreaterEqual(
                    expected[(shape, sid, "ising")][0], expected[(shape, sid, "xxz")][0]
                )

    def test_reproduces_published_orders(self):
        expected = load_expected()
        cells = reproduce_table1()
        self.assertEqual(len(cells), len(TABLE1_SHAPES) * len(TABLE1_MODELS) * 4)
        for cell in cells:
            with self.subTest(cell=cell.key):
                self.assertFalse(cell.ambiguous, cell.error)
                self.assertEqual((cell.order, cell.asterisk), expected[cell.key])


class ModelRobustnessTests(SimpleTestCase):

    def test_xxz_orders_do_not_depend_on_anisotropy(self):
        cells = {"X1": ("S1", 0), TABLE1_SEQUENCES[4]: ("Q1", 1)}
        for text, (name, expected) in cells.items():
            for ratio in (0.1, 0.3, 0.5):
                model = preset("xxz", jperp_tau=ratio)
                report = classify_order(parse_sequence(text), builtin(name), model, attribution=False)
                self.assertEqual(report.order, expected, (text, ratio))

    def test_bath_orders_do_not_depend_on_seed(self):
        expected = load_expected()
        for name, sid in (("S1", 1), ("Q1", 2)):
            want = expected[(name, sid, "bath")]
            for seed in (1, 2, 3):
                model = preset("bath", bath_seed=seed)
                report = classify_order(parse_sequence(TABLE1_SEQUENCES[sid]), builtin(name), model,
                                        attribution=False)
                self.assertEqual((report.table_order, report.asterisk), want, (name, sid, seed))
