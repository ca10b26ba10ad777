"""
Fourier-parameterized soft pulses.

A pulse on one interval [0, tau] (tau = 1) is

    V(t) = a0 + sum_m [a_m cos(m Ω t) + b_m sin(m Ω t)],   Ω = 2π,

with V in units of Ω, so the rotation angle is exactly 2π·a0.
"""

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from django.conf import settings

from .exceptions import PulseDomainError

logger = logging.getLogger(__name__)

OMEGA = 2 * np.pi
TIME_SLACK = 1e-12


@dataclass(frozen=True)
class PulseShape:
    name: str
    a0: float
    a: tuple = ()
    b: tuple = ()
    smoothness_L: int = 0
    claimed_K: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if self.smoothness_L < 0 or self.claimed_K < 0:
            raise PulseDomainError("smoothness_L and claimed_K must be nonnegative")

    # --------------------------
    # Coefficients
    # --------------------------
    @property
    def harmonics(self):
        return max(len(self.a), len(self.b))

    def cosines(self):
        out = np.zeros(self.harmonics)
        out[:len(self.a)] = self.a
        return out

    def sines(self):
        out = np.zeros(self.harmonics)
        out[:len(self.b)] = self.b
        return out

    @property
    def angle(self):
        return self.rotation_angle()

    # --------------------------
    # Operations
    # --------------------------
    def evaluate(self, t):
        """Amplitude at lab time t ∈ [0, tau], in units of Ω. Accepts arrays."""
        t = np.asarray(t, dtype=float)
        if np.any(t < -TIME_SLACK) or np.any(t > 1 + TIME_SLACK):
            raise PulseDomainError("evaluation time outside [0, tau]")
        m = np.arange(1, self.harmonics + 1)
        phase = OMEGA * np.multiply.outer(t, m)
        value = self.a0 + np.cos(phase) @ self.cosines() + np.sin(phase) @ self.sines()
        return float(value) if value.ndim == 0 else value

    def rotation_angle(self):
        """∫ V Ω dt over the interval; the harmonics integrate to zero."""
        return OMEGA * self.a0

    def smoothness_residuals(self):
        """
        Values of the even derivatives V^(2j)(0) / Ω^(2j), j = 0..L−1.

        Entry j keeps the sign of the derivative, (−1)^j Σ m^(2j) a_m plus a0
        for j = 0, so entry 1 is −Σ m² a_m. Only vanishing is tested.

        Odd derivatives of the cosine series vanish at both ends
        identically; see `odd_residuals` for the sine part.
        """
        m = np.arange(1, self.harmonics + 1, dtype=float)
        a = self.cosines()
        out = []
        for j in range(self.smoothness_L):
            value = (-1) ** j * np.sum(m ** (2 * j) * a)
            if j == 0:
                value += self.a0
            out.append(float(value))
        return out

    def odd_residuals(self):
        m = np.arange(1, self.harmonics + 1, dtype=float)
        b = self.sines()
        return [float((-1) ** j * np.sum(m ** (2 * j + 1) * b)) for j in range(self.smoothness_L)]

    def is_smooth(self, tol=None):
        tol = settings.REFOCUS["SMOOTHNESS_TOLERANCE"] if tol is None else tol
        residuals = self.smoothness_residuals() + self.odd_residuals()
        return all(abs(r) <= tol for r in residuals)

    # --------------------------
    # Derived shapes
    # --------------------------
    def rescaled(self, angle, name=None):
        factor = angle / self.rotation_angle()
        return replace(
            self,
            name=name or f"{self.name}@{angle / np.pi:g}pi",
            a0=self.a0 * factor,
            a=tuple(x * factor for x in self.a),
            b=tuple(x * factor for x in self.b),
        )

    def compressed(self, repeats):
        """The same pulse played `repeats` times back to back inside one interval."""
        if repeats < 1:
            raise PulseDomainError("repeats must be positive")
        a = np.zeros(self.harmonics * repeats)
        b = np.zeros(self.harmonics * repeats)
        a[repeats - 1::repeats] = repeats * self.cosines()
        b[repeats - 1::repeats] = repeats * self.sines()
        return replace(
            self,
            name=f"{self.name}x{repeats}",
            a0=repeats * self.a0,
            a=tuple(a),
            b=tuple(b),
        )

    def shifted(self):
        """Alternate time convention: V(t + tau/2), i.e. odd harmonics flipped."""
        sign = np.array([(-1) ** m for m in range(1, self.harmonics + 1)])
        return replace(
            self,
            name=f"{self.name}~shifted",
            a=tuple(self.cosines() * sign),
            b=tuple(self.sines() * sign),
        )

    # --------------------------
    # Serialization
    # --------------------------
    def to_dict(self):
        return {
            "name": self.name,
            "angle_over_pi": 2 * self.a0,
            "L": self.smoothness_L,
            "K": self.claimed_K,
            "A": [float(x) for x in self.a],
            "B": [float(x) for x in self.b],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                name=str(data["name"]),
                a0=float(data["angle_over_pi"]) / 2,
                a=tuple(data.get("A", ())),
                b=tuple(data.get("B", ())),
                smoothness_L=int(data.get("L", 0)),
                claimed_K=int(data.get("K", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PulseDomainError(f"malformed pulse data: {exc}") from exc


def load_pulse(path):
    path = Path(path)
    with path.open() as fh:
        shape = PulseShape.from_dict(json.load(fh))
    logger.debug("loaded pulse %s from %s", shape.name, path)
    return shape


def dump_pulse(shape):
    # repr-precision floats keep published coefficients exact
    return json.dumps(shape.to_dict(), indent=2) + "\n"
