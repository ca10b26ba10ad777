import numpy as np
from django.test import SimpleTestCase

from matcore.ops import PAULI, hermiticity_defect, kron_all, rotation
from pulseshape.builtins import builtin
from pulseshape.shapes import OMEGA

from .chain import (
    EVEN, ODD, AxisPulse, BathFields, ChainModel, ClusterSpec, Interval, ModelError,
    enumerate_clusters, preset,
)
from .hamiltonians import build_control, build_internal, frame_basis


class BuildInternalTests(SimpleTestCase):

    def test_ising_pair_is_diagonal(self):
        h = build_internal(preset("ising"), ClusterSpec(2))
        np.testing.assert_allclose(h, 0.25 * np.diag([1, -1, -1, 1]), atol=1e-15)

    def test_no_couplings_gives_zero(self):
        h = build_internal(ChainModel(), ClusterSpec(3, EVEN))
        np.testing.assert_array_equal(h, np.zeros((8, 8)))

    def test_xxz_pair_spectrum(self):
        h = build_internal(preset("xxz"), ClusterSpec(2))
        np.testing.assert_allclose(
            np.sort(np.linalg.eigvalsh(h)), [-0.4, -0.1, 0.25, 0.25], atol=1e-14,
        )

    def test_bath_model_is_hermitian(self):
        h = build_internal(preset("bath"), ClusterSpec(4))
        self.assertLess(hermiticity_defect(h), 1e-15)

    def test_scaling_homogeneity(self):
        model = ChainModel(jz=0.7, jperp=0.2, bath=BathFields(b=0.4, seed=3))
        cluster = ClusterSpec(3)
        np.testing.assert_allclose(
            build_internal(model.scaled(2.5), cluster),
            2.5 * build_internal(model, cluster),
            atol=1e-14,
        )

    def test_bath_fields_depend_on_seed_parity_and_index(self):
        bath = BathFields(b=1.0, seed=5)
        self.assertEqual(bath.strength(ODD, 2), BathFields(b=1.0, seed=5).strength(ODD, 2))
        self.assertNotEqual(bath.strength(ODD, 2), bath.strength(EVEN, 2))
        self.assertNotEqual(bath.strength(ODD, 2), BathFields(b=1.0, seed=6).strength(ODD, 2))
        self.assertLessEqual(abs(bath.strength(EVEN, 0)), 1.0)

    def test_cut_bond_decouples_halves(self):
        h = build_internal(preset("ising"), ClusterSpec(4, cut_bonds=(1,)))
        left = build_internal(preset("ising"), ClusterSpec(2))
        right = build_internal(preset("ising"), ClusterSpec(2))
        expected = np.kron(left, np.eye(4)) + np.kron(np.eye(4), right)
        np.testing.assert_allclose(h, expected, atol=1e-15)


class ModelTests(SimpleTestCase):

    def test_tag_invariants(self):
        with self.assertRaises(ModelError):
            ChainModel(name="ising", jz=1, jperp=0.3)
        with self.assertRaises(ModelError):
            ChainModel(name="xxz", jz=1)
        with self.assertRaises(ModelError):
            ChainModel(name="bath", jz=1)

    def test_presets(self):
        self.assertEqual(preset("xxz").jperp, 0.3)
        self.assertTrue(preset("bath").has_bath)
        self.assertEqual(preset("none").active_terms(), [])

    def test_override_drops_tag_when_invariant_breaks(self):
        model = preset("ising", jperp_tau=0.5)
        self.assertEqual(model.name, "custom")
        self.assertEqual(model.jperp, 0.5)

    def test_unknown_preset(self):
        with self.assertRaises(ModelError):
            preset("heisenberg")

    def test_single_term_views(self):
        model = preset("bath")
        self.assertEqual(model.active_terms(), ["ising", "bath-odd", "bath-even"])
        self.assertEqual(model.only("ising").active_terms(), ["ising"])
        self.assertEqual(model.only("bath-even").active_terms(), ["bath-even"])
        self.assertEqual(model.restrict_bath([ODD]).active_terms(), ["ising", "bath-odd"])


class BuildControlTests(SimpleTestCase):

    def setUp(self):
        self.s1 = builtin("S1")

    def test_idle_gives_zero(self):
        h = build_control(Interval(), 0.3, ClusterSpec(2))
        np.testing.assert_array_equal(h, np.zeros((4, 4)))

    def test_pulse_vanishes_at_interval_start(self):
        h = build_control(Interval(odd=AxisPulse(self.s1)), 0.0, ClusterSpec(1))
        self.assertLess(np.max(np.abs(h)), 1e-9)

    def test_y_pulse_at_midpoint(self):
        pulse = AxisPulse(self.s1, phase=np.pi / 2)
        h = build_control(Interval(odd=pulse), 0.5, ClusterSpec(1))
        np.testing.assert_allclose(h, 0.5 * 1.959292035 * OMEGA * PAULI["y"], atol=1e-8)

    def test_sites_follow_their_parity(self):
        interval = Interval(even=AxisPulse(self.s1, sign=-1))
        h = build_control(interval, 0.5, ClusterSpec(2, ODD))
        expected = -0.5 * 1.959292035 * OMEGA * np.kron(np.eye(2), PAULI["x"])
        np.testing.assert_allclose(h, expected, atol=1e-8)

    def test_time_out_of_interval(self):
        with self.assertRaises(ModelError):
            build_control(Interval(), -0.1, ClusterSpec(1))
        with self.assertRaises(ModelError):
            build_control(Interval(), 1.0, ClusterSpec(1))

    def test_phase_is_normalized(self):
        self.assertAlmostEqual(AxisPulse(self.s1, phase=-np.pi / 2).phase, 1.5 * np.pi)


class EnumerateClustersTests(SimpleTestCase):

    def test_first_order_ising(self):
        clusters = enumerate_clusters(1, preset("ising"))
        self.assertEqual(clusters, [ClusterSpec(2, ODD), ClusterSpec(2, EVEN)])

    def test_second_order_ising(self):
        clusters = enumerate_clusters(2, preset("ising"))
        self.assertEqual(len(clusters), 4)
        self.assertEqual({c.n_sites for c in clusters}, {2, 3})

    def test_bath_adds_single_sites(self):
        clusters = enumerate_clusters(2, preset("bath"))
        self.assertEqual(len(clusters), 6)
        self.assertEqual(len(set(clusters)), 6)
        self.assertIn(ClusterSpec(1, EVEN), clusters)

    def test_order_must_be_positive(self):
        with self.assertRaises(ModelError):
            enumerate_clusters(0, preset("ising"))

    def test_labels_parse_back(self):
        for cluster in enumerate_clusters(3, preset("bath")):
            self.assertEqual(ClusterSpec.from_label(cluster.label), cluster)
        for label in ("7x", "e", ""):
            with self.assertRaises(ModelError):
                ClusterSpec.from_label(label)


class FrameBasisTests(SimpleTestCase):

    def _coefficients(self, factors):
        from propagate.integrator import frame_coefficients
        return frame_coefficients(np.stack(factors))

    def test_identity_frame_reproduces_internal(self):
        model = ChainModel(jz=0.8, jperp=0.3, bath=BathFields(b=0.5, seed=2))
        cluster = ClusterSpec(3, EVEN)
        basis = frame_basis(model, cluster)
        h = basis.rotated(self._coefficients([np.eye(2), np.eye(2)]))
        np.testing.assert_allclose(h, build_internal(model, cluster), atol=1e-14)

    def test_rotated_frame_matches_dense_conjugation(self):
        model = ChainModel(jz=1.0, jperp=0.4, bath=BathFields(b=1.0, seed=1))
        cluster = ClusterSpec(4, ODD)
        factors = [rotation(0.7, 0.3), rotation(2.1, 1.9)]
        w = kron_all([factors[cluster.parity(i)] for i in range(4)])
        expected = w.conj().T @ build_internal(model, cluster) @ w
        h = frame_basis(model, cluster).rotated(self._coefficients(factors))
        np.testing.assert_allclose(h, expected, atol=1e-13)
