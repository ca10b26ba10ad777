"""
Magnus cumulants: I + R_1 + R_2 + ... = exp(C_1 + C_2 + ...), graded by
powers of the coupling.
"""

import logging
import math

import numpy as np
from django.conf import settings
from scipy.integrate import cumulative_trapezoid, trapezoid

from matcore.ops import IDENTITY

from .exceptions import QuadratureError, UnsupportedOrderError
from .integrator import cached_basis, frame_coefficients, site_trajectory

logger = logging.getLogger(__name__)


def cumulants_from_moments(r):
    """
    C_k as the grade-k part of log(I + Σ R_j).

    C_1 = R_1, C_2 = R_2 − R_1²/2, C_3 = R_3 − (R_1R_2 + R_2R_1)/2 + R_1³/3, ...
    """
    r = [np.asarray(m) for m in r]
    limit = settings.REFOCUS["MAX_CUMULANT_ORDER"]
    if len(r) > limit:
        raise UnsupportedOrderError(f"cumulants are available up to order {limit}, got {len(r)}")
    K = len(r)
    if K == 0:
        return []

    # powers[n][k]: grade-k part of (Σ R_j)^n, for n, k = 1..K
    powers = {1: {k: r[k - 1] for k in range(1, K + 1)}}
    for n in range(2, K + 1):
        powers[n] = {}
        for k in range(n, K + 1):
            powers[n][k] = sum(r[j - 1] @ powers[n - 1][k - j] for j in range(1, k - n + 2))

    return [
        sum(((-1) ** (n + 1) / n) * powers[n][k] for n in range(1, k + 1))
        for k in range(1, K + 1)
    ]


def _nested_trapezoid(samples, dt):
    """−½ ∫dt2 [H(t2), ∫_0^t2 H(t1) dt1] by composite trapezoid."""
    inner = cumulative_trapezoid(samples, dx=dt, axis=0, initial=0)
    integrand = samples @ inner - inner @ samples
    return -0.5 * trapezoid(integrand, dx=dt, axis=0)


def magnus_c2_quadrature(cluster, model, schedule, grid=None):
    """
    Second Magnus cumulant C_2 = −½ ∫dt2 ∫^t2 dt1 [H̃_S(t2), H̃_S(t1)] by
    nested quadrature over a stored U0 trajectory, with one Richardson step
    between `grid` and `grid / 2` points per interval.
    """
    grid = int(grid or settings.REFOCUS["QUADRATURE_GRID"])
    minimum = settings.REFOCUS["MIN_QUADRATURE_GRID"]
    if grid < minimum:
        raise QuadratureError(f"quadrature grid {grid} is below the minimum of {minimum}")
    if grid % 2:
        raise QuadratureError("quadrature grid must be even")

    d = cluster.dim
    if not model.active_terms():
        return np.zeros((d, d), dtype=complex)

    substeps = max(1, math.ceil(settings.REFOCUS["STEPS_PER_INTERVAL"] / grid))
    frame = np.stack([IDENTITY, IDENTITY])
    nodes = []
    for index, interval in enumerate(schedule.intervals):
        trajectory = site_trajectory(interval, grid * substeps)
        local = trajectory.nodes[::substeps] @ frame
        nodes.append(local if index == 0 else local[1:])
        frame = trajectory.final @ frame

    basis = cached_basis(model, cluster)
    samples = basis.rotated(frame_coefficients(np.concatenate(nodes)))
    fine = _nested_trapezoid(samples, 1.0 / grid)
    coarse = _nested_trapezoid(samples[::2], 2.0 / grid)
    logger.debug("C2 quadrature on %s: %d samples", cluster, len(samples))
    return (4 * fine - coarse) / 3
