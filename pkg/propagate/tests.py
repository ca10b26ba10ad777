import numpy as np
from django.test import SimpleTestCase

from matcore.ops import frobenius_norm, kron_all, rotation, unitarity_drift
from pulseshape.builtins import PUBLISHED, builtin
from sequences.schedule import parse_sequence
from spinmodel.chain import EVEN, ODD, AxisPulse, ChainModel, ClusterSpec, Interval, preset

from .cumulants import cumulants_from_moments, magnus_c2_quadrature
from .exceptions import IntegrationError, QuadratureError, UnsupportedOrderError
from .integrator import (
    IntervalCache, integrate_exact, integrate_perturbative, site_trajectory, truncation_error,
)


def relative_error(a, b):
    return frobenius_norm(a - b) / frobenius_norm(b)


class SiteTrajectoryTests(SimpleTestCase):

    def test_shipped_shapes_realize_their_rotation(self):
        for name in PUBLISHED:
            for phase in (0.0, np.pi / 2):
                interval = Interval(odd=AxisPulse(builtin(name), phase=phase))
                u = site_trajectory(interval, 2000).final
                np.testing.assert_allclose(u[ODD], rotation(np.pi, phase), atol=1e-9)
                np.testing.assert_allclose(u[EVEN], np.eye(2), atol=1e-15)

    def test_negative_pulse(self):
        interval = Interval(even=AxisPulse(builtin("S1"), sign=-1))
        u = site_trajectory(interval, 2000).final
        np.testing.assert_allclose(u[EVEN], rotation(-np.pi, 0.0), atol=1e-9)


class IntegratePerturbativeTests(SimpleTestCase):

    def setUp(self):
        self.s1 = builtin("S1")
        self.q1 = builtin("Q1")

    def test_no_coupling_gives_bare_rotations(self):
        schedule = parse_sequence("X1 Y2", self.s1)
        result = integrate_perturbative(ClusterSpec(2, ODD), ChainModel(), schedule, K=3)
        for rk in result.r:
            np.testing.assert_array_equal(rk, np.zeros((4, 4)))
        expected = np.kron(rotation(np.pi, 0.0), rotation(np.pi, np.pi / 2))
        np.testing.assert_allclose(result.u0, expected, atol=1e-8)

    def test_s1_refocuses_first_order(self):
        schedule = parse_sequence("X1", self.s1)
        result = integrate_perturbative(ClusterSpec(2, ODD), preset("ising"), schedule, K=1)
        self.assertLess(frobenius_norm(result.r[0]), 1e-6)

    def test_q1_refocuses_second_order(self):
        schedule = parse_sequence("X1", self.q1)
        result = integrate_perturbative(ClusterSpec(2, ODD), preset("ising"), schedule, K=2)
        self.assertLess(frobenius_norm(result.r[0]), 1e-6)
        self.assertLess(frobenius_norm(result.r[1]), 1e-6)

    def test_gaussian_does_not_refocus(self):
        schedule = parse_sequence("X1", builtin("gauss"))
        result = integrate_perturbative(ClusterSpec(2, ODD), preset("ising"), schedule, K=1)
        self.assertGreater(frobenius_norm(result.r[0]), 1e-3)

    def test_idle_first_moment(self):
        model = preset("ising")
        cluster = ClusterSpec(2)
        result = integrate_perturbative(cluster, model, parse_sequence("I"), K=1)
        np.testing.assert_allclose(result.r[0], -0.25j * np.diag([1, -1, -1, 1]), atol=1e-12)

    def test_unitary_at_default_steps(self):
        schedule = parse_sequence("X1", self.s1)
        result = integrate_perturbative(ClusterSpec(2), preset("ising"), schedule, K=1)
        self.assertLess(result.unitarity_drift, 1e-9)

    def test_fourth_order_drift(self):
        schedule = parse_sequence("X1", self.s1)
        coarse = integrate_perturbative(ClusterSpec(1), ChainModel(), schedule, K=1, steps=100)
        fine = integrate_perturbative(ClusterSpec(1), ChainModel(), schedule, K=1, steps=400)
        self.assertGreater(coarse.unitarity_drift / fine.unitarity_drift, 128)

    def test_coupling_power_homogeneity(self):
        schedule = parse_sequence("X1 Y2", self.q1)
        cluster = ClusterSpec(3, EVEN)
        base = integrate_perturbative(cluster, ChainModel(jz=0.5, jperp=0.2), schedule, K=3)
        double = integrate_perturbative(cluster, ChainModel(jz=1.0, jperp=0.4), schedule, K=3)
        for k, (r1, r2) in enumerate(zip(base.r, double.r), start=1):
            self.assertLess(relative_error(r2, 2 ** k * r1), 1e-7)

    def test_interval_cache(self):
        schedule = parse_sequence("X1 Y2 X1 Y2", self.s1)
        cluster = ClusterSpec(2, ODD)
        cache = IntervalCache()
        low = integrate_perturbative(cluster, preset("xxz"), schedule, K=1, cache=cache)
        self.assertEqual(len(cache), 2)
        high = integrate_perturbative(cluster, preset("xxz"), schedule, K=2, cache=cache)
        plain = integrate_perturbative(cluster, preset("xxz"), schedule, K=2)
        np.testing.assert_allclose(low.r[0], plain.r[0], atol=1e-14)
        np.testing.assert_allclose(high.r[1], plain.r[1], atol=1e-14)

    def test_invalid_requests(self):
        schedule = parse_sequence("X1", self.s1)
        with self.assertRaises(IntegrationError):
            integrate_perturbative(ClusterSpec(2), preset("ising"), schedule, K=0)
        with self.assertRaises(IntegrationError):
            integrate_perturbative(ClusterSpec(2), preset("ising"), schedule, K=1, steps=50)


class IntegrateExactTests(SimpleTestCase):

    def test_matches_bare_propagator_without_coupling(self):
        schedule = parse_sequence("X1 ~Y2", builtin("Q1"))
        cluster = ClusterSpec(3, ODD)
        exact = integrate_exact(cluster, ChainModel(), schedule)
        bare = integrate_perturbative(cluster, ChainModel(), schedule, K=1).u0
        np.testing.assert_allclose(exact, bare, atol=1e-8)

    def test_idle_is_diagonal_phase(self):
        u = integrate_exact(ClusterSpec(2), preset("ising"), parse_sequence("I"))
        np.testing.assert_allclose(u, np.diag(np.exp(-0.25j * np.array([1, -1, -1, 1]))), atol=1e-10)
        self.assertLess(unitarity_drift(u), 1e-9)

    def test_first_order_truncation_scales_quadratically(self):
        schedule = parse_sequence("X1", builtin("S1"))
        cluster = ClusterSpec(2, ODD)
        larger = truncation_error(cluster, ChainModel(jz=0.05), schedule, K=1)
        smaller = truncation_error(cluster, ChainModel(jz=0.025), schedule, K=1)
        self.assertAlmostEqual(larger / smaller, 4.0, delta=0.4)

    def test_remainder_matches_propagator_difference(self):
        schedule = parse_sequence("X1 Y2", builtin("Q1"))
        cluster = ClusterSpec(3, ODD)
        model = ChainModel(jz=0.4)
        exact = integrate_exact(cluster, model, schedule)
        result = integrate_perturbative(cluster, model, schedule, K=2)
        direct = frobenius_norm(exact - result.u0 @ result.moment_sum())
        self.assertAlmostEqual(truncation_error(cluster, model, schedule, K=2) / direct, 1.0, delta=1e-4)

    def test_remainder_resolved_far_below_rounding_of_propagators(self):
        schedule = parse_sequence("X1 Y2 ~X1 ~Y2", builtin("S1"))
        cluster = ClusterSpec(3, ODD)
        larger = truncation_error(cluster, ChainModel(jz=2e-3), schedule, K=3)
        smaller = truncation_error(cluster, ChainModel(jz=1e-3), schedule, K=3)
        self.assertLess(larger, 1e-9)
        self.assertAlmostEqual(larger / smaller, 16.0, delta=2.0)

    def test_no_coupling_no_remainder(self):
        schedule = parse_sequence("X1", builtin("S1"))
        self.assertEqual(truncation_error(ClusterSpec(2), ChainModel(), schedule, K=1), 0.0)


class CumulantTests(SimpleTestCase):

    def test_vanishing_first_moment(self):
        m = np.array([[0.0, 1.0], [2.0, 3.0]])
        c1, c2 = cumulants_from_moments([np.zeros((2, 2)), m])
        np.testing.assert_array_equal(c1, np.zeros((2, 2)))
        np.testing.assert_array_equal(c2, m)

    def test_scalar_exponential(self):
        c1, c2 = cumulants_from_moments([np.array([[-0.1j]]), np.array([[-0.005]])])
        np.testing.assert_allclose(c1, [[-0.1j]])
        np.testing.assert_allclose(c2, [[0.0]], atol=1e-15)

    def test_inverts_exponential_series(self):
        rng = np.random.default_rng(3)
        c1, c2, c3 = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
        r1 = c1
        r2 = c2 + c1 @ c1 / 2
        r3 = c3 + (c1 @ c2 + c2 @ c1) / 2 + c1 @ c1 @ c1 / 6
        out = cumulants_from_moments([r1, r2, r3])
        for got, expected in zip(out, (c1, c2, c3)):
            np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_order_cap(self):
        with self.assertRaises(UnsupportedOrderError):
            cumulants_from_moments([np.zeros((2, 2))] * 5)

    def test_refocusing_is_equivalent_for_moments_and_cumulants(self):
        schedule = parse_sequence("X1", builtin("Q1"))
        result = integrate_perturbative(ClusterSpec(3), preset("ising"), schedule, K=3)
        cumulants = cumulants_from_moments(result.r)
        for k in range(3):
            moment_zero = frobenius_norm(result.r[k]) < 1e-6
            cumulant_zero = frobenius_norm(cumulants[k]) < 1e-6
            self.assertEqual(moment_zero, cumulant_zero, f"order {k + 1}")


class MagnusQuadratureTests(SimpleTestCase):

    def test_zero_coupling(self):
        schedule = parse_sequence("X1", builtin("S1"))
        c2 = magnus_c2_quadrature(ClusterSpec(2), ChainModel(), schedule)
        np.testing.assert_array_equal(c2, np.zeros((4, 4)))

    def test_constant_diagonal_hamiltonian(self):
        c2 = magnus_c2_quadrature(ClusterSpec(2), preset("ising"), parse_sequence("I I"))
        self.assertLess(frobenius_norm(c2), 1e-14)

    def test_grid_checks(self):
        schedule = parse_sequence("X1", builtin("S1"))
        with self.assertRaises(QuadratureError):
            magnus_c2_quadrature(ClusterSpec(2), preset("ising"), schedule, grid=100)
        with self.assertRaises(QuadratureError):
            magnus_c2_quadrature(ClusterSpec(2), preset("ising"), schedule, grid=301)

    def test_cross_oracle(self):
        for name in ("S1", "Q1", "gauss"):
            schedule = parse_sequence("X1", builtin(name))
            for cluster in (ClusterSpec(2, ODD), ClusterSpec(3, EVEN)):
                result = integrate_perturbative(cluster, preset("ising"), schedule, K=2)
                c2 = cumulants_from_moments(result.r)[1]
                oracle = magnus_c2_quadrature(cluster, preset("ising"), schedule)
                self.assertLess(relative_error(c2, oracle), 1e-6, f"{name} on {cluster}")

    def test_composed_schedule_matches_oracle(self):
        schedule = parse_sequence("X1 Y2 ~X1", builtin("S1"))
        cluster = ClusterSpec(3, ODD)
        result = integrate_perturbative(cluster, preset("xxz"), schedule, K=2)
        c2 = cumulants_from_moments(result.r)[1]
        oracle = magnus_c2_quadrature(cluster, preset("xxz"), schedule)
        self.assertLess(relative_error(c2, oracle), 1e-6)


class ClusterAdditivityTests(SimpleTestCase):

    def test_split_chain_cumulants_add(self):
        model = preset("ising")
        schedule = parse_sequence("X1 Y2", builtin("S1"))
        whole = integrate_perturbative(ClusterSpec(4, ODD, cut_bonds=(1,)), model, schedule, K=2)
        half = integrate_perturbative(ClusterSpec(2, ODD), model, schedule, K=2)
        c_whole = cumulants_from_moments(whole.r)
        c_half = cumulants_from_moments(half.r)
        eye = np.eye(4)
        for got, part in zip(c_whole, c_half):
            expected = kron_all([part, eye]) + kron_all([eye, part])
            np.testing.assert_allclose(got, expected, atol=1e-8)
