"""
Sweeps producing (x, error) tables for log-log plots: the BB1 composite
pulse under amplitude mismatch and coupling, and the error-versus-coupling
scaling law of refocusing sequences.
"""

import logging

import numpy as np
from django.conf import settings

from matcore.ops import frobenius_norm, kron_all, rotation
from propagate.integrator import integrate_exact, truncation_error
from spinmodel.chain import ODD, AxisPulse, ChainModel, ClusterSpec, Interval

from .exceptions import MissingPulseError
from .schedule import PulseSchedule

logger = logging.getLogger(__name__)


def fit_slope(xs, ys):
    """Slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# --------------------------
# BB1
# --------------------------
def bb1_schedule(pi_shape, two_pi_shape, epsilon=0.0):
    """
    Nominal π_0 followed by π_φ 2π_3φ π_φ on odd sites, φ = arccos(−θ/4π),
    every pulse with amplitude scaled by (1 + ε).
    """
    if pi_shape is None or two_pi_shape is None:
        raise MissingPulseError("BB1 needs both a π and a 2π pulse shape")
    theta = pi_shape.rotation_angle()
    phi = np.arccos(-theta / (4 * np.pi))
    scale = 1.0 + epsilon
    pulses = [(pi_shape, 0.0), (pi_shape, phi), (two_pi_shape, 3 * phi), (pi_shape, phi)]
    intervals = tuple(
        Interval(odd=AxisPulse(shape, phase=phase, scale=scale)) for shape, phase in pulses
    )
    return PulseSchedule(intervals=intervals, shape=pi_shape)


def bb1_target(pi_shape, cluster):
    odd = rotation(pi_shape.rotation_angle(), 0.0)
    return kron_all([odd if cluster.parity(i) == ODD else np.eye(2) for i in range(cluster.n_sites)])


def bb1_error(pi_shape, two_pi_shape, epsilon, model=None, cluster=None, steps=None):
    model = model or ChainModel()
    cluster = cluster or ClusterSpec(1, ODD)
    schedule = bb1_schedule(pi_shape, two_pi_shape, epsilon)
    exact = integrate_exact(cluster, model, schedule, steps)
    return frobenius_norm(exact - bb1_target(pi_shape, cluster))


def bb1_sweep(pi_shape, two_pi_shape, epsilons, model=None, cluster=None, steps=None):
    """(ε, error) rows; a single spin unless a model and cluster are given."""
    rows = []
    for eps in epsilons:
        if not 0 <= eps <= 0.2:
            raise ValueError(f"amplitude mismatch {eps} outside [0, 0.2]")
        rows.append((float(eps), bb1_error(pi_shape, two_pi_shape, eps, model, cluster, steps)))
        logger.info("bb1 eps=%.4g error=%.4g", *rows[-1])
    return rows


def bb1_chain_sweep(pi_shape, two_pi_shape, couplings, epsilon=0.0, steps=None):
    """(jz·τ, error) rows on the two-site Ising chain at fixed mismatch."""
    cluster = ClusterSpec(2, ODD)
    rows = []
    for jz in couplings:
        model = ChainModel(jz=float(jz))
        rows.append((float(jz), bb1_error(pi_shape, two_pi_shape, epsilon, model, cluster, steps)))
        logger.info("bb1 chain jz=%.4g error=%.4g", *rows[-1])
    return rows


# --------------------------
# Scaling law
# --------------------------
def scaling_sweep(schedule, model, K, couplings, cluster=None, steps=None):
    """
    (J·τ, ‖U_exact − U0(I + R_1 + ... + R_K)‖_F) rows with all couplings of
    `model` scaled by J, plus the fitted log-log slope (expected K + 1).
    """
    cluster = cluster or ClusterSpec(3, ODD)
    steps = steps or settings.REFOCUS["SCALING_STEPS_PER_INTERVAL"]
    schedule = schedule.require_shape()
    rows = []
    for j in couplings:
        error = truncation_error(cluster, model.scaled(float(j)), schedule, K, steps)
        rows.append((float(j), error))
        logger.info("scaling J=%.4g error=%.4g", j, error)
    xs, ys = zip(*rows)
    return rows, fit_slope(xs, ys)
