import itertools

import numpy as np
from django.test import SimpleTestCase, override_settings

from .exceptions import CapacityError, RefocusError, RegisterIndexError
from .ops import (
    IDENTITY, PAULI, embed_pair, frobenius_norm, kron_embed, rotation, unitarity_drift,
)


class KronEmbedTests(SimpleTestCase):

    def test_sigma_z_on_leftmost_site(self):
        m = kron_embed(PAULI["z"], 0, 2)
        np.testing.assert_allclose(m, np.diag([1, 1, -1, -1]))

    def test_sigma_x_on_second_site(self):
        m = kron_embed(PAULI["x"], 1, 2)
        expected = np.zeros((4, 4))
        for i, j in [(0, 1), (1, 0), (2, 3), (3, 2)]:
            expected[i, j] = 1
        np.testing.assert_allclose(m, expected)

    def test_identity_embeds_to_identity(self):
        for site in range(3):
            np.testing.assert_allclose(kron_embed(IDENTITY, site, 3), np.eye(8))

    def test_site_out_of_range(self):
        with self.assertRaises(RegisterIndexError):
            kron_embed(PAULI["x"], 2, 2)
        with self.assertRaises(RegisterIndexError):
            kron_embed(PAULI["x"], -1, 2)

    def test_bond_out_of_range_is_a_domain_error(self):
        with self.assertRaises(RefocusError):
            embed_pair(PAULI["z"], PAULI["z"], 1, 2)

    @override_settings(REFOCUS={"MAX_QUBITS": 3})
    def test_capacity(self):
        with self.assertRaises(CapacityError):
            kron_embed(PAULI["x"], 0, 4)

    def test_disjoint_sites_commute(self):
        for n in range(2, 5):
            for a, b in itertools.product("xyz", repeat=2):
                for i, j in itertools.permutations(range(n), 2):
                    x = kron_embed(PAULI[a], i, n)
                    y = kron_embed(PAULI[b], j, n)
                    np.testing.assert_allclose(x @ y, y @ x, atol=1e-14)


class FrobeniusNormTests(SimpleTestCase):

    def test_zero(self):
        self.assertEqual(frobenius_norm(np.zeros((4, 4))), 0.0)

    def test_identity(self):
        self.assertAlmostEqual(frobenius_norm(np.eye(2)), np.sqrt(2))

    def test_pauli_product(self):
        self.assertAlmostEqual(frobenius_norm(np.kron(PAULI["x"], PAULI["y"])), 2.0)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u = np.kron(rotation(0.7, 0.3), rotation(2.1, 1.9))
        self.assertLess(unitarity_drift(u), 1e-14)
        self.assertAlmostEqual(frobenius_norm(u @ m), frobenius_norm(m), places=12)
