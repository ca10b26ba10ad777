"""
Dense complex matrix helpers shared by every app.

Tensor ordering is fixed globally: site 0 is the leftmost (slowest)
factor of every Kronecker product.
"""

from functools import reduce

import numpy as np
from django.conf import settings

from .exceptions import CapacityError, NumericalError, RegisterIndexError

IDENTITY = np.eye(2, dtype=complex)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# x, y, z stacked along axis 0
PAULI_STACK = np.stack([PAULI["x"], PAULI["y"], PAULI["z"]])


def check_capacity(n):
    limit = settings.REFOCUS["MAX_QUBITS"]
    if n > limit:
        raise CapacityError(f"{n} qubits requested, maximum is {limit}")


def kron_all(factors):
    """Kronecker product of a list of matrices, first factor leftmost."""
    return reduce(np.kron, factors)


def kron_embed(op, site, n):
    """
    Embed a single-qubit operator at `site` of an `n`-qubit register.

    Returns I ⊗ ... ⊗ op ⊗ ... ⊗ I with op at tensor slot `site`.
    """
    check_capacity(n)
    if not 0 <= site < n:
        raise RegisterIndexError(f"site {site} outside a {n}-qubit register")
    factors = [IDENTITY] * n
    factors[site] = np.asarray(op, dtype=complex)
    return kron_all(factors)


def embed_pair(op_a, op_b, site, n):
    """Embed op_a at `site` and op_b at `site + 1`."""
    check_capacity(n)
    if not 0 <= site < n - 1:
        raise RegisterIndexError(f"bond at {site} outside a {n}-qubit register")
    factors = [IDENTITY] * n
    factors[site] = np.asarray(op_a, dtype=complex)
    factors[site + 1] = np.asarray(op_b, dtype=complex)
    return kron_all(factors)


def frobenius_norm(m):
    return float(np.linalg.norm(m))


def max_abs(m):
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def unitarity_drift(m):
    """Max-entry of M†M − I."""
    return max_abs(dagger(m) @ m - np.eye(m.shape[-1]))


def hermiticity_defect(m):
    return max_abs(m - dagger(m))


def ensure_finite(m, hint=""):
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"non-finite values encountered{hint}")
    return m


def rotation(theta, phase=0.0):
    """exp(−i θ/2 (cos φ σx + sin φ σy)), exact."""
    axis = np.cos(phase) * PAULI["x"] + np.sin(phase) * PAULI["y"]
    return np.cos(theta / 2) * IDENTITY - 1j * np.sin(theta / 2) * axis


# I, x, y, z stacked along axis 0
PAULI4 = np.concatenate([IDENTITY[None], PAULI_STACK])
