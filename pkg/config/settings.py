"""
Django settings for the softpulse project.

The project has no web surface and no database; Django provides the
settings layer, logging configuration, management commands and the
test runner.
"""

import os
from pathlib import Path

# --------------------------------------------------
# Base directory
# --------------------------------------------------
BASE_DIR = Path(__file__).resolve().parent.parent


# --------------------------------------------------
# Security
# --------------------------------------------------
# Nothing is signed or served; Django still requires a key.
SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'softpulse-local-only')
DEBUG = os.getenv('DJANGO_DEBUG', '') == '1'


# --------------------------------------------------
# Applications
# --------------------------------------------------
INSTALLED_APPS = [
    'matcore',
    'spinmodel',
    'pulseshape',
    'propagate',
    'sequences',
    'optimize',
    'bathframe',
    # management commands (verify, classify, search, table1, design, sweep)
    'cli',
]


# --------------------------------------------------
# Numerics
# --------------------------------------------------
# Time is measured in units of the pulse period tau, so every coupling
# below is the dimensionless product J * tau.
REFOCUS = {
    # matcore
    "MAX_QUBITS": 10,

    # propagate
    "STEPS_PER_INTERVAL": 2000,
    "EXACT_STEP_FACTOR": 4,
    "MIN_STEPS": 100,
    "MAX_CUMULANT_ORDER": 4,
    "QUADRATURE_GRID": 1000,
    "MIN_QUADRATURE_GRID": 200,
    "UNITARITY_TOLERANCE": 1e-9,
    "ASSEMBLY_CHUNK_BYTES": 64 * 1024 * 1024,

    # sequences
    "CLASSIFY_STEPS_PER_INTERVAL": 2000,
    "ZERO_THRESHOLD": 1e-6,
    "NONZERO_THRESHOLD": 1e-3,
    # residuals under NONZERO_THRESHOLD count when this many times their step-doubling error
    "NOISE_MARGIN": 10,
    "MAX_ORDER": 9,
    "SEARCH_BUDGET": 10**6,
    "SCALING_STEPS_PER_INTERVAL": 4000,

    # pulseshape
    "SMOOTHNESS_TOLERANCE": 1e-8,
    "FIT_HARMONICS": 16,
    "FIT_GRID": 4096,
    "GAUSS_SIGMA": 1 / 8,
    "HERM_SIGMA": 1 / 8,
    "PULSE_CONVENTION": os.getenv("REFOCUS_PULSE_CONVENTION", "lab"),

    # optimize
    "DESIGN_STEPS_PER_INTERVAL": 1000,
    "DESIGN_TARGET": 1e-16,
    "DESIGN_ACCEPT": 1e-15,
    "ANNEAL_T0": 1.0,
    "ANNEAL_DECAY": 0.97,
    "ANNEAL_SWEEPS": 200,
    "ANNEAL_STEP": 0.05,
    "DESCENT_ITERATIONS": 50,
    "POLISH_EVALUATIONS": 400,

    # bathframe
    "HARMONIC_CUTOFF": 64,
    "SAMPLES_PER_INTERVAL": 256,

    # concurrency
    "THREADS": int(os.getenv("REFOCUS_THREADS", "1")),
}

# Model presets addressable by name from the command line.
# The xxz ratio jperp/jz is not fixed by the published tables; 0.3 is the
# default and integer orders are expected not to depend on it.
MODEL_PRESETS = {
    "ising": {"jz_tau": 1.0, "jperp_tau": 0.0},
    "xxz": {"jz_tau": 1.0, "jperp_tau": 0.3},
    "bath": {"jz_tau": 1.0, "jperp_tau": 0.0, "bath_b_tau": 1.0, "bath_seed": 1},
    "none": {"jz_tau": 0.0, "jperp_tau": 0.0},
}


# --------------------------------------------------
# Logging
# --------------------------------------------------
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.getenv("REFOCUS_LOG_LEVEL", "WARNING"),
    },
}


# --------------------------------------------------
# Internationalization
# --------------------------------------------------
USE_I18N = False
USE_TZ = True
TIME_ZONE = 'UTC'
