"""
Rotating-frame matrices of one sublattice over a pulse schedule.

In the frame of the bare evolution, u†(t) σ^μ u(t) = Σ_μ' Q^{μμ'}(t) σ^μ'.
Q is a real rotation, and its Fourier harmonics over the schedule period
tell which static or slow fields the schedule averages out: a constant
field along z on a site is refocused to first order when the zeroth
harmonic row C_0^{zμ'} vanishes.
"""

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from propagate.integrator import frame_coefficients, site_trajectory
from spinmodel.chain import PARITY_NAMES, parity_code

from .exceptions import SamplingError

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")
MIN_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class RotationTrajectory:
    parity: int
    times: np.ndarray
    # (samples, 3, 3), Q[j, μ, μ']
    q: np.ndarray
    period: float

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True, eq=False)
class HarmonicTable:
    parity: int
    # m -> 3×3 complex matrix C_m, with Q(t) ≈ Σ_m C_m exp(−i m Ω̃ t)
    c: dict
    period: float
    m_max: int
    reconstruction_residual: float

    @property
    def main_frequency(self):
        return 2 * np.pi / self.period

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        entries = [f"{a}{b}" for a in AXES for b in AXES]
        writer.writerow(["m"] + [f"{e}_{part}" for e in entries for part in ("re", "im")])
        for m in sorted(self.c):
            row = [m]
            for value in self.c[m].ravel():
                row.extend([f"{value.real:.12g}", f"{value.imag:.12g}"])
            writer.writerow(row)
        return buffer.getvalue()


def rotation_trajectory(schedule, site_parity, samples=None):
    """
    Q(t) at `samples` uniform points per interval over the whole schedule,
    the end point excluded.
    """
    parity = parity_code(site_parity)
    samples = samples or settings.REFOCUS["SAMPLES_PER_INTERVAL"]
    if samples < MIN_SAMPLES:
        raise SamplingError(f"{samples} samples per interval, at least {MIN_SAMPLES} needed")
    schedule = schedule.require_shape()
    substeps = -(-settings.REFOCUS["STEPS_PER_INTERVAL"] // samples)

    frames = []
    w = np.eye(2, dtype=complex)
    for interval in schedule.intervals:
        trajectory = site_trajectory(interval, samples * substeps)
        nodes = trajectory.stages[::substeps, 0, parity]
        frames.append(nodes @ w)
        w = trajectory.final[parity] @ w

    u = np.concatenate(frames)
    q = np.real(frame_coefficients(u)[..., 1:])
    times = np.arange(len(u)) * schedule.period / samples
    logger.debug("rotation trajectory on %s sites: %d samples", PARITY_NAMES[parity], len(u))
    return RotationTrajectory(parity=parity, times=times, q=q, period=schedule.duration)


def harmonics(trajectory, m_max=None):
    """C_m for |m| ≤ m_max from the discrete Fourier transform of Q over one period."""
    m_max = settings.REFOCUS["HARMONIC_CUTOFF"] if m_max is None else m_max
    n = len(trajectory)
    times = trajectory.times
    dt = trajectory.period / n
    if n < 2 or not np.allclose(times, np.arange(n) * dt, rtol=0, atol=1e-12 * trajectory.period):
        raise SamplingError("trajectory is not sampled uniformly over one period")
    if 2 * m_max >= n:
        raise SamplingError(f"cutoff {m_max} exceeds the Nyquist limit of {n} samples")

    spectrum = np.fft.ifft(trajectory.q, axis=0)
    c = {m: spectrum[m] for m in range(-m_max, m_max + 1)}

    omega = 2 * np.pi / trajectory.period
    phases = np.exp(-1j * omega * np.outer(times, np.arange(-m_max, m_max + 1)))
    rebuilt = np.einsum("jm,mab->jab", phases, np.stack([c[m] for m in range(-m_max, m_max + 1)]))
    residual = float(np.max(np.abs(rebuilt - trajectory.q)))
    return HarmonicTable(
        parity=trajectory.parity, c=c, period=trajectory.period, m_max=m_max,
        reconstruction_residual=residual,
    )


def refocusing_check(table, axis="z"):
    """|C_0^{axis, μ'}| for μ' = x, y, z."""
    row = table.c[0][AXES.index(axis)]
    return np.abs(row)


def refocuses(table, axis="z", tol=None):
    tol = settings.REFOCUS["ZERO_THRESHOLD"] if tol is None else tol
    return float(np.max(refocusing_check(table, axis))) < tol
