"""
Dense Hamiltonians on a cluster (tau = 1, Ω = 2π):

    H_S = 1/4 Σ_bonds [jz σzσz + jperp (σxσx + σyσy)] + 1/2 Σ_n B_n (n·σ)_n
    H_C = 1/2 Σ_n s_n V_n(t) Ω (cos φ_n σx_n + sin φ_n σy_n)
"""

import logging
from dataclasses import dataclass

import numpy as np

from matcore.ops import PAULI, PAULI4, PAULI_STACK, check_capacity, embed_pair, kron_embed
from pulseshape.shapes import OMEGA

from .chain import EVEN, ODD, ModelError

logger = logging.getLogger(__name__)


def field_strengths(model, cluster):
    if not model.has_bath:
        return np.zeros(cluster.n_sites)
    return np.array([
        model.bath.strength(cluster.parity(i), i) for i in range(cluster.n_sites)
    ])


def build_internal(model, cluster):
    check_capacity(cluster.n_sites)
    n, d = cluster.n_sites, cluster.dim
    h = np.zeros((d, d), dtype=complex)
    for i, j in cluster.bonds:
        if model.jz:
            h += 0.25 * model.jz * embed_pair(PAULI["z"], PAULI["z"], i, n)
        if model.jperp:
            h += 0.25 * model.jperp * (
                embed_pair(PAULI["x"], PAULI["x"], i, n) + embed_pair(PAULI["y"], PAULI["y"], i, n)
            )
    if model.has_bath:
        axis = np.asarray(model.bath.axis, dtype=float)
        local = np.tensordot(axis, PAULI_STACK, axes=1)
        for i, b in enumerate(field_strengths(model, cluster)):
            h += 0.5 * b * kron_embed(local, i, n)
    return h


def site_control(pulse, t):
    """Single-site control Hamiltonian (2×2) for an AxisPulse or idle."""
    if pulse is None:
        return np.zeros((2, 2), dtype=complex)
    axis = np.cos(pulse.phase) * PAULI["x"] + np.sin(pulse.phase) * PAULI["y"]
    return 0.5 * OMEGA * pulse.amplitude(t) * axis


def build_control(assignments, t, cluster):
    if not 0 <= t < 1:
        raise ModelError(f"control time {t} outside [0, tau)")
    check_capacity(cluster.n_sites)
    h = np.zeros((cluster.dim, cluster.dim), dtype=complex)
    for parity in (ODD, EVEN):
        pulse = assignments.pulse(parity)
        if pulse is None:
            continue
        local = site_control(pulse, t)
        for i in cluster.sites_of(parity):
            h += kron_embed(local, i, cluster.n_sites)
    return h


def sublattice_sums(cluster):
    """Σ σx and Σ σy over each sublattice, shape (2 parities, 2 axes, d, d)."""
    n, d = cluster.n_sites, cluster.dim
    out = np.zeros((2, 2, d, d), dtype=complex)
    for parity in (ODD, EVEN):
        for i in cluster.sites_of(parity):
            out[parity, 0] += kron_embed(PAULI["x"], i, n)
            out[parity, 1] += kron_embed(PAULI["y"], i, n)
    return out


# --------------------------
# Rotating frame
# --------------------------
@dataclass(frozen=True, eq=False)
class FrameBasis:
    """
    H_S expanded so that U0† H_S U0 can be assembled from single-site data.

    With U0 = ⊗ u_{parity(n)}, write u†σ^μ u = Σ_ν c^{μν} σ^ν over
    ν ∈ {I, x, y, z}. Then every bond of sublattice type (pa, pb)
    contributes 1/4 Σ_μ J^μ c_pa^{μν} c_pb^{μν'} σ^ν ⊗ σ^ν', and the fields
    of parity p contribute 1/2 Σ_μ n^μ c_p^{μν} Σ_n B_n σ^ν_n.
    """
    bond_types: tuple
    operators: np.ndarray
    couplings: np.ndarray
    field_axis: np.ndarray
    dim: int

    def rotated(self, coefficients):
        """
        H̃_S for frame coefficients of shape (..., 2, 3, 4) (parity, μ, ν).
        Returns (..., d, d).
        """
        c = np.asarray(coefficients)
        weights = []
        for pa, pb in self.bond_types:
            w = 0.25 * np.einsum("...mi,m,...mj->...ij", c[..., pa, :, :], self.couplings, c[..., pb, :, :])
            weights.append(w.reshape(*w.shape[:-2], 16))
        f = 0.5 * np.einsum("m,...pmi->...pi", self.field_axis, c)
        weights.append(f.reshape(*f.shape[:-2], 8))
        w = np.concatenate(weights, axis=-1)
        flat = w @ self.operators.reshape(self.operators.shape[0], -1)
        return flat.reshape(*w.shape[:-1], self.dim, self.dim)


def frame_basis(model, cluster):
    check_capacity(cluster.n_sites)
    n, d = cluster.n_sites, cluster.dim
    types = sorted({(cluster.parity(i), cluster.parity(j)) for i, j in cluster.bonds})
    ops = []
    for pa, pb in types:
        block = np.zeros((4, 4, d, d), dtype=complex)
        for i, j in cluster.bonds:
            if (cluster.parity(i), cluster.parity(j)) != (pa, pb):
                continue
            for a in range(4):
                for b in range(4):
                    block[a, b] += embed_pair(PAULI4[a], PAULI4[b], i, n)
        ops.append(block.reshape(16, d, d))

    fields = np.zeros((2, 4, d, d), dtype=complex)
    strengths = field_strengths(model, cluster)
    for i, b in enumerate(strengths):
        if b:
            for a in range(4):
                fields[cluster.parity(i), a] += b * kron_embed(PAULI4[a], i, n)
    ops.append(fields.reshape(8, d, d))

    axis = np.asarray(model.bath.axis, dtype=float) if model.has_bath else np.zeros(3)
    logger.debug("frame basis for %s: %d bond types", cluster, len(types))
    return FrameBasis(
        bond_types=tuple(types),
        operators=np.concatenate(ops, axis=0),
        couplings=model.couplings,
        field_axis=axis,
        dim=d,
    )
