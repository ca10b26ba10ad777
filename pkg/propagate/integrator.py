"""
Fixed-step RK4 integration of the bare propagator U0 and the perturbative
corrections R_1..R_K over a pulse schedule:

    U0' = -i H_C(t) U0,      R_k' = -i H̃_S(t) R_{k-1},   R_0 = I,
    H̃_S = U0† H_S U0.

The bare evolution factorizes over sites and every site of one parity
sees the same control, so U0 is carried as one 2×2 factor per parity.
Each interval is integrated from the identity in its own frame and the
results are composed across the schedule.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from django.conf import settings

from matcore.ops import (
    IDENTITY, PAULI4, PAULI_STACK, check_capacity, dagger, ensure_finite,
    frobenius_norm, kron_all, unitarity_drift,
)
from pulseshape.shapes import OMEGA
from spinmodel.chain import EVEN, ODD
from spinmodel.hamiltonians import build_internal, frame_basis, sublattice_sums

from .exceptions import IntegrationError

logger = logging.getLogger(__name__)

cached_basis = lru_cache(maxsize=16)(frame_basis)


@dataclass(frozen=True, eq=False)
class PerturbativeResult:
    u0: np.ndarray
    r: tuple
    steps_per_interval: int
    cluster: object

    @property
    def order(self):
        return len(self.r)

    def residual_norms(self):
        return [frobenius_norm(rk) for rk in self.r]

    def moment_sum(self, K=None):
        """I + R_1 + ... + R_K."""
        out = np.eye(self.u0.shape[0], dtype=complex)
        for rk in self.r[:K]:
            out = out + rk
        return out

    @property
    def unitarity_drift(self):
        return unitarity_drift(self.u0)


@dataclass(frozen=True, eq=False)
class SiteTrajectory:
    """RK4 stage values (steps, 4, parity, 2, 2) and the end value (parity, 2, 2)."""
    stages: np.ndarray
    final: np.ndarray

    @property
    def nodes(self):
        return np.concatenate([self.stages[:, 0], self.final[None]])


# --------------------------
# Helpers
# --------------------------
def check_steps(steps, default_key="STEPS_PER_INTERVAL"):
    steps = int(steps or settings.REFOCUS[default_key])
    minimum = settings.REFOCUS["MIN_STEPS"]
    if steps < minimum:
        raise IntegrationError(f"{steps} steps per interval requested, minimum is {minimum}")
    return steps


def stage_times(steps):
    """Step size and the three distinct RK4 sample times per step, (steps, 3)."""
    h = 1.0 / steps
    t = np.arange(steps) * h
    return h, np.stack([t, t + h / 2, t + h], axis=1)


def control_coefficients(interval, times):
    """
    Amplitudes of Σσx and Σσy per parity, shape (*times.shape, 2, 2),
    so that H_C = Σ_p Σ_a coeff[p, a] · (Σ_{n ∈ p} σ^a_n).
    """
    out = np.zeros(times.shape + (2, 2))
    for parity in (ODD, EVEN):
        pulse = interval.pulse(parity)
        if pulse is None:
            continue
        amp = 0.5 * OMEGA * pulse.amplitude(times)
        out[..., parity, 0] = amp * np.cos(pulse.phase)
        out[..., parity, 1] = amp * np.sin(pulse.phase)
    return out


def frame_coefficients(u):
    """c[..., μ, ν] = ½ Tr(σ^ν u† σ^μ u) for stacks of 2×2 matrices u."""
    u = np.asarray(u)
    conj = dagger(u)[..., None, :, :] @ PAULI_STACK @ u[..., None, :, :]
    return 0.5 * np.einsum("...mab,nba->...mn", conj, PAULI4)


def dense_frame(site_factors, cluster):
    return kron_all([site_factors[cluster.parity(i)] for i in range(cluster.n_sites)])


# --------------------------
# Single-site bare evolution
# --------------------------
@lru_cache(maxsize=256)
def site_trajectory(interval, steps):
    h, times = stage_times(steps)
    coeffs = control_coefficients(interval, times)
    gen = -1j * np.einsum("nspa,aij->nspij", coeffs, PAULI_STACK[:2])

    u = np.stack([IDENTITY, IDENTITY])
    stages = np.empty((steps, 4, 2, 2, 2), dtype=complex)
    for n in range(steps):
        start, mid, end = gen[n]
        k1 = start @ u
        y2 = u + 0.5 * h * k1
        k2 = mid @ y2
        y3 = u + 0.5 * h * k2
        k3 = mid @ y3
        y4 = u + h * k3
        k4 = end @ y4
        stages[n, 0], stages[n, 1], stages[n, 2], stages[n, 3] = u, y2, y3, y4
        u = u + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    stages.setflags(write=False)
    u.setflags(write=False)
    return SiteTrajectory(stages=stages, final=u)


# --------------------------
# Interval moments
# --------------------------
class IntervalCache:
    """
    Per-interval (u, R_1..R_K) keyed by cluster, model, interval and step
    count. Entries integrated to a lower order are replaced on demand.
    """

    def __init__(self):
        self._entries = {}
        self._lock = threading.Lock()

    def get(self, key, K):
        with self._lock:
            entry = self._entries.get(key)
        if entry is None or len(entry[1]) < K:
            return None
        return entry[0], entry[1][:K]

    def put(self, key, value):
        with self._lock:
            current = self._entries.get(key)
            if current is None or len(current[1]) < len(value[1]):
                self._entries[key] = value

    def __len__(self):
        return len(self._entries)


def _drive(gen, moments):
    out = np.empty_like(moments)
    out[0] = gen
    if len(moments) > 1:
        out[1:] = gen @ moments[:-1]
    return out


def interval_moments(cluster, model, interval, K, steps):
    """R_1..R_K of one interval started from the identity, shape (K, d, d)."""
    trajectory = site_trajectory(interval, steps)
    d = cluster.dim
    moments = np.zeros((K, d, d), dtype=complex)
    if not model.active_terms():
        return trajectory.final, moments

    basis = cached_basis(model, cluster)
    h = 1.0 / steps
    chunk = max(1, settings.REFOCUS["ASSEMBLY_CHUNK_BYTES"] // (4 * d * d * 16))
    for start in range(0, steps, chunk):
        block = trajectory.stages[start:start + chunk]
        gens = -1j * basis.rotated(frame_coefficients(block))
        for g1, g2, g3, g4 in gens:
            k1 = _drive(g1, moments)
            k2 = _drive(g2, moments + 0.5 * h * k1)
            k3 = _drive(g3, moments + 0.5 * h * k2)
            k4 = _drive(g4, moments + h * k3)
            moments = moments + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return trajectory.final, moments


def _cached_interval(cluster, model, interval, K, steps, cache):
    if cache is None:
        return interval_moments(cluster, model, interval, K, steps)
    key = (cluster, model, interval, steps)
    hit = cache.get(key, K)
    if hit is not None:
        return hit
    value = interval_moments(cluster, model, interval, K, steps)
    cache.put(key, value)
    return value


def compose(moments, frame, local):
    """
    Moments after appending one interval.

    With W the accumulated bare frame and r_a the interval's own moments,
    R_k ← Σ_{a=0..k} (W† r_a W) R_{k−a}, where r_0 = R_0 = I.
    """
    rotated = dagger(frame) @ local @ frame
    out = np.empty_like(moments)
    for k in range(len(moments)):
        acc = rotated[k] + moments[k]
        for a in range(k):
            acc = acc + rotated[a] @ moments[k - a - 1]
        out[k] = acc
    return out


# --------------------------
# Public operations
# --------------------------
def integrate_perturbative(cluster, model, schedule, K, steps=None, cache=None):
    if K < 1:
        raise IntegrationError("perturbative order must be at least 1")
    steps = check_steps(steps)
    check_capacity(cluster.n_sites)

    d = cluster.dim
    sites = np.stack([IDENTITY, IDENTITY])
    moments = np.zeros((K, d, d), dtype=complex)
    for interval in schedule.intervals:
        u, r = _cached_interval(cluster, model, interval, K, steps, cache)
        if np.any(r):
            moments = compose(moments, dense_frame(sites, cluster), r)
        sites = u @ sites

    u0 = dense_frame(sites, cluster)
    hint = f" (cluster {cluster}, {steps} steps per interval; try more steps)"
    ensure_finite(u0, hint)
    ensure_finite(moments, hint)

    result = PerturbativeResult(u0=u0, r=tuple(moments), steps_per_interval=steps, cluster=cluster)
    drift = result.unitarity_drift
    if drift > settings.REFOCUS["UNITARITY_TOLERANCE"]:
        logger.warning("U0 unitarity drift %.3g on %s at %d steps", drift, cluster, steps)
    logger.debug("integrated %s: K=%d, %d intervals, %d steps", cluster, K, len(schedule.intervals), steps)
    return result


def integrate_clusters(clusters, model, schedule, K, steps=None, cache=None):
    """integrate_perturbative over several clusters, results in input order."""
    threads = settings.REFOCUS["THREADS"]

    def run(cluster):
        return integrate_perturbative(cluster, model, schedule, K, steps, cache)

    if threads <= 1 or len(clusters) <= 1:
        return [run(c) for c in clusters]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, clusters))


def integrate_exact(cluster, model, schedule, steps=None):
    """Dense RK4 of U' = -i(H_C + H_S)U at EXACT_STEP_FACTOR × the perturbative density."""
    steps = check_steps(steps) * settings.REFOCUS["EXACT_STEP_FACTOR"]
    check_capacity(cluster.n_sites)

    h_s = build_internal(model, cluster)
    sums = sublattice_sums(cluster)
    h, times = stage_times(steps)
    d = cluster.dim
    chunk = max(1, settings.REFOCUS["ASSEMBLY_CHUNK_BYTES"] // (3 * d * d * 16))
    u = np.eye(d, dtype=complex)
    for interval in schedule.intervals:
        coeffs = control_coefficients(interval, times)
        for start in range(0, steps, chunk):
            block = coeffs[start:start + chunk]
            gens = -1j * (h_s + np.einsum("nspa,paij->nsij", block, sums))
            for g_start, g_mid, g_end in gens:
                k1 = g_start @ u
                k2 = g_mid @ (u + 0.5 * h * k1)
                k3 = g_mid @ (u + 0.5 * h * k2)
                k4 = g_end @ (u + h * k3)
                u = u + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    ensure_finite(u, f" (cluster {cluster}, {steps} exact steps per interval)")
    drift = unitarity_drift(u)
    if drift > settings.REFOCUS["UNITARITY_TOLERANCE"]:
        logger.warning("exact propagator unitarity drift %.3g on %s", drift, cluster)
    return u


def _drive_remainder(gen, state):
    """Derivatives of (R_1..R_K, D) with D' = G (R_K + D)."""
    out = _drive(gen, state)
    out[-1] = out[-1] + gen @ state[-1]
    return out


def truncation_error(cluster, model, schedule, K, steps=None):
    """
    ‖U_exact − U0 (I + R_1 + ... + R_K)‖_F.

    In the interaction frame U = U0 (I + R_1 + ... + R_K + D), and the
    remainder obeys D' = −i H̃_S (R_K + D) with D(0) = 0. D is carried
    through the whole schedule next to the moments, so the error is read
    off as ‖D‖_F without subtracting two nearly equal propagators.
    """
    if K < 1:
        raise IntegrationError("perturbative order must be at least 1")
    steps = check_steps(steps)
    check_capacity(cluster.n_sites)

    if not model.active_terms():
        return 0.0
    d = cluster.dim
    state = np.zeros((K + 1, d, d), dtype=complex)

    basis = cached_basis(model, cluster)
    h = 1.0 / steps
    chunk = max(1, settings.REFOCUS["ASSEMBLY_CHUNK_BYTES"] // (4 * d * d * 16))
    sites = np.stack([IDENTITY, IDENTITY])
    for interval in schedule.intervals:
        trajectory = site_trajectory(interval, steps)
        for start in range(0, steps, chunk):
            block = trajectory.stages[start:start + chunk] @ sites
            gens = -1j * basis.rotated(frame_coefficients(block))
            for g1, g2, g3, g4 in gens:
                k1 = _drive_remainder(g1, state)
                k2 = _drive_remainder(g2, state + 0.5 * h * k1)
                k3 = _drive_remainder(g3, state + 0.5 * h * k2)
                k4 = _drive_remainder(g4, state + h * k3)
                state = state + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        sites = trajectory.final @ sites

    ensure_finite(state, f" (cluster {cluster}, {steps} steps per interval)")
    logger.debug("remainder on %s: K=%d, %d steps", cluster, K, steps)
    return frobenius_norm(state[-1])
