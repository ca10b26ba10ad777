"""
Shipped pulse shapes.

S_L and Q_L are the published first- and second-order self-refocusing
inversion pulses (L = number of vanishing even derivatives at the ends).
The Gaussian and Hermite references are analytic envelopes re-fit to the
cosine series, offset-subtracted so V(0) = V(tau) = 0, and calibrated
to a π rotation.
"""

import logging
from functools import lru_cache

import numpy as np
from django.conf import settings

from .exceptions import PulseDomainError, UnknownShapeError
from .shapes import OMEGA, PulseShape

logger = logging.getLogger(__name__)

PUBLISHED = {
    "S1": {"L": 1, "K": 1, "A": (-1.2053194466, 0.4796460175, 0.2256734291)},
    "S2": {"L": 2, "K": 1, "A": (-1.1950755990, 0.7841246569, 0.0738054432, -0.1628545011)},
    "Q1": {"L": 1, "K": 2, "A": (-1.1374003264, 1.5774784244, -0.6825954606, -0.2574826374)},
    "Q2": {"L": 2, "K": 2, "A": (
        -1.0965122417, 1.5309957409, -1.1470791601, 0.0020722004, 0.2105234605,
    )},
}

BUILTIN_NAMES = ("S1", "S2", "Q1", "Q2", "gauss", "herm")


def fit_envelope(name, envelope, angle=np.pi, harmonics=None, grid=None, claimed_K=0):
    """
    Cosine-series fit of an envelope sampled on [0, tau).

    The constant term is replaced so the truncated series vanishes at the
    ends (offset subtraction done in Fourier space), then every coefficient
    is scaled so the rotation angle equals `angle`.
    """
    harmonics = harmonics or settings.REFOCUS["FIT_HARMONICS"]
    grid = grid or settings.REFOCUS["FIT_GRID"]
    t = np.arange(grid) / grid
    g = envelope(t)
    m = np.arange(1, harmonics + 1)
    a = 2 * np.mean(g[None, :] * np.cos(OMEGA * np.outer(m, t)), axis=1)
    a0 = -np.sum(a)
    if a0 <= 0:
        raise PulseDomainError(f"{name}: offset-subtracted envelope has no positive area")
    factor = angle / (OMEGA * a0)
    return PulseShape(
        name=name,
        a0=a0 * factor,
        a=tuple(a * factor),
        smoothness_L=1,
        claimed_K=claimed_K,
    )


def gaussian_shape(sigma=None, angle=np.pi):
    sigma = sigma or settings.REFOCUS["GAUSS_SIGMA"]

    def envelope(t):
        return np.exp(-((t - 0.5) ** 2) / (2 * sigma ** 2))

    return fit_envelope("gauss", envelope, angle=angle)


def hermite_shape(beta, sigma=None, angle=np.pi):
    sigma = sigma or settings.REFOCUS["HERM_SIGMA"]

    def envelope(t):
        x = (t - 0.5) / sigma
        return (1 - beta * x ** 2) * np.exp(-x ** 2)

    return fit_envelope("herm", envelope, angle=angle, claimed_K=1)


@lru_cache(maxsize=None)
def _calibrated_hermite(sigma):
    # calibration needs the propagator, which depends on this app
    from optimize.design import calibrate_hermite

    beta = calibrate_hermite(sigma)
    logger.info("hermite sigma=%.4g calibrated to beta=%.10g", sigma, beta)
    return hermite_shape(beta, sigma)


def builtin(name, sigma=None):
    """Look up a shipped shape by name; `sigma` applies to gauss / herm only."""
    if name in PUBLISHED:
        row = PUBLISHED[name]
        shape = PulseShape(
            name=name,
            a0=0.5,
            a=row["A"],
            smoothness_L=row["L"],
            claimed_K=row["K"],
        )
    elif name == "gauss":
        shape = gaussian_shape(sigma)
    elif name == "herm":
        shape = _calibrated_hermite(sigma or settings.REFOCUS["HERM_SIGMA"])
    else:
        raise UnknownShapeError(f"unknown shape {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")

    if settings.REFOCUS["PULSE_CONVENTION"] == "shifted":
        shape = shape.shifted()
    return shape
