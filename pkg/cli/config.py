"""
Run configuration shared by the management commands: flag / config-file
merging, shape and model resolution, number formatting and atomic output.
"""

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import CommandError

from pulseshape.builtins import BUILTIN_NAMES, builtin
from pulseshape.shapes import load_pulse
from spinmodel.chain import preset

logger = logging.getLogger(__name__)

USAGE, FAILURE = 1, 2


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    jz_tau: float | None = None
    jperp_tau: float | None = None
    bath_b_tau: float | None = None
    bath_seed: int | None = None
    shape: str | None = None
    sigma: float | None = None
    sequence: str | None = None
    k_max: int | None = None
    steps: int | None = None
    seed: int | None = None
    output: str | None = None
    format: str | None = None
    # command-specific options
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_options(cls, command, options, defaults=None):
        """
        Flags win over the --config file, which wins over `defaults`.
        Keys that are not RunConfig fields land in `extra`.
        """
        values = dict(defaults or {})
        path = options.get("config")
        if path:
            values.update(load_config_file(path))
        values.update({k: v for k, v in options.items() if v is not None})
        names = {f.name for f in fields(cls)} - {"command", "extra"}
        config = cls(
            command=command,
            extra={k: v for k, v in values.items() if k not in names},
            **{k: v for k, v in values.items() if k in names},
        )
        config.validate()
        return config

    def validate(self):
        limit = settings.REFOCUS["MAX_ORDER"]
        if self.k_max is not None and not 1 <= int(self.k_max) <= limit:
            raise CommandError(f"--k-max must lie in 1..{limit}", returncode=USAGE)
        if self.format not in (None, "json", "csv"):
            raise CommandError(f"unknown format {self.format!r}", returncode=USAGE)

    def option(self, name, default=None):
        return self.extra.get(name, default)

    def resolve_model(self):
        return preset(
            self.model or "ising",
            jz_tau=self.jz_tau, jperp_tau=self.jperp_tau,
            bath_b_tau=self.bath_b_tau, bath_seed=self.bath_seed,
        )

    def resolve_shape(self, name=None):
        return resolve_shape(name or self.shape, self.sigma)


def load_config_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CommandError(f"cannot read config file {path}: {exc}", returncode=USAGE) from exc
    if not isinstance(data, dict):
        raise CommandError(f"config file {path} must hold a JSON object", returncode=USAGE)
    return {key.replace("-", "_"): value for key, value in data.items()}


def resolve_shape(text, sigma=None):
    """A builtin shape by name, or a pulse JSON file by path."""
    if text in BUILTIN_NAMES:
        return builtin(text, sigma)
    if text and Path(text).is_file():
        return load_pulse(text)
    raise CommandError(
        f"unknown shape {text!r}: expected one of {', '.join(BUILTIN_NAMES)} or a pulse file",
        returncode=USAGE,
    )


def parse_angle(text):
    """'pi', '2pi', 'pi/2' or a number of radians."""
    cleaned = str(text).replace(" ", "").lower()
    try:
        if "pi" not in cleaned:
            return float(cleaned)
        head, _, tail = cleaned.partition("pi")
        factor = float(head.rstrip("*")) if head else 1.0
        divisor = float(tail.lstrip("/")) if tail else 1.0
        return factor * np.pi / divisor
    except ValueError:
        raise CommandError(f"cannot read angle {text!r}", returncode=USAGE) from None


def parse_values(text):
    """'start:stop:count' (log-spaced) or a comma-separated list."""
    try:
        if isinstance(text, (list, tuple)):
            return [float(v) for v in text]
        if ":" in str(text):
            start, stop, count = str(text).split(":")
            return list(np.geomspace(float(start), float(stop), int(count)))
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise CommandError(f"cannot read values {text!r}", returncode=USAGE) from None


def round_numbers(value):
    """Floats rounded to 12 significant digits, recursively."""
    if isinstance(value, dict):
        return {k: round_numbers(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_numbers(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(f"{value:.12g}")
    if isinstance(value, np.integer):
        return int(value)
    return value


def dumps_report(report):
    return json.dumps(round_numbers(report), indent=2) + "\n"


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info("wrote %s", path)
