"""
Chain models, clusters and per-sublattice pulse assignments.

Sites are split into two sublattices by parity; all sites of one parity
receive the same control. ODD is the sublattice addressed by subscript 1
in sequence notation, EVEN by subscript 2.
"""

from dataclasses import dataclass, replace

import numpy as np
from django.conf import settings

from matcore.exceptions import RefocusError

ODD, EVEN = 0, 1
PARITY_NAMES = {ODD: "odd", EVEN: "even"}
MODEL_TAGS = ("ising", "xxz", "bath")
COUPLING_TERMS = ("ising", "perp", "bath-odd", "bath-even")


class ModelError(RefocusError):
    """Raised for inconsistent model parameters."""


def parity_code(value):
    if value in (ODD, EVEN):
        return value
    try:
        return {"odd": ODD, "even": EVEN}[value]
    except KeyError:
        raise ModelError(f"unknown parity {value!r}") from None


# --------------------------
# Models
# --------------------------
@dataclass(frozen=True)
class BathFields:
    """Static random fields, uniform on [−b, b] along `axis`."""
    b: float
    seed: int = 1
    axis: tuple = (0.0, 0.0, 1.0)
    parities: tuple = (ODD, EVEN)

    def strength(self, parity, index):
        if parity not in self.parities:
            return 0.0
        rng = np.random.default_rng([int(self.seed), int(parity), int(index)])
        return float(rng.uniform(-self.b, self.b))


@dataclass(frozen=True)
class ChainModel:
    name: str = "custom"
    jz: float = 0.0
    jperp: float = 0.0
    bath: BathFields | None = None

    def __post_init__(self):
        if self.name == "ising" and (self.jperp != 0 or self.bath is not None):
            raise ModelError("ising model takes no transverse coupling and no bath")
        if self.name == "xxz" and (self.jperp == 0 or self.bath is not None):
            raise ModelError("xxz model needs a transverse coupling and no bath")
        if self.name == "bath":
            if self.jz == 0 or self.jperp != 0 or self.bath is None:
                raise ModelError("bath model is an Ising chain with static fields")
            if tuple(self.bath.axis) != (0.0, 0.0, 1.0):
                raise ModelError("bath model fields are along z only")

    @property
    def couplings(self):
        """Per-axis bond couplings (x, y, z)."""
        return np.array([self.jperp, self.jperp, self.jz], dtype=float)

    @property
    def has_bath(self):
        return self.bath is not None and self.bath.b != 0

    def scaled(self, factor):
        bath = replace(self.bath, b=self.bath.b * factor) if self.bath else None
        return ChainModel(name="custom", jz=self.jz * factor, jperp=self.jperp * factor, bath=bath)

    def only(self, term):
        """The model restricted to one coupling term (see COUPLING_TERMS)."""
        if term == "ising":
            return ChainModel(jz=self.jz)
        if term == "perp":
            return ChainModel(jperp=self.jperp)
        if term in ("bath-odd", "bath-even"):
            parity = ODD if term == "bath-odd" else EVEN
            return ChainModel(bath=replace(self.bath, parities=(parity,)))
        raise ModelError(f"unknown coupling term {term!r}")

    def active_terms(self):
        terms = []
        if self.jz:
            terms.append("ising")
        if self.jperp:
            terms.append("perp")
        if self.has_bath:
            terms.extend(f"bath-{PARITY_NAMES[p]}" for p in self.bath.parities)
        return terms

    def restrict_bath(self, parities):
        """The same model with bath fields only on the given parities."""
        if self.bath is None:
            return self
        return ChainModel(jz=self.jz, jperp=self.jperp,
                          bath=replace(self.bath, parities=tuple(sorted(parities))))


def preset(name, **overrides):
    """
    A named model from settings.MODEL_PRESETS, with optional key overrides
    (jz_tau, jperp_tau, bath_b_tau, bath_seed).
    """
    try:
        values = dict(settings.MODEL_PRESETS[name])
    except KeyError:
        raise ModelError(f"unknown model {name!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return model_from_keys(values, tag=name if name in MODEL_TAGS else "custom")


def model_from_keys(values, tag="custom"):
    bath = None
    if values.get("bath_b_tau"):
        bath = BathFields(b=float(values["bath_b_tau"]), seed=int(values.get("bath_seed", 1)))
    model = ChainModel(
        name="custom",
        jz=float(values.get("jz_tau", 0.0)),
        jperp=float(values.get("jperp_tau", 0.0)),
        bath=bath,
    )
    # keep the tag only when the overrides still satisfy its invariants
    try:
        return replace(model, name=tag)
    except ModelError:
        return model


# --------------------------
# Clusters
# --------------------------
@dataclass(frozen=True)
class ClusterSpec:
    """A contiguous sub-chain; `cut_bonds` lists bond indices left uncoupled."""
    n_sites: int
    first_parity: int = ODD
    cut_bonds: tuple = ()

    def __post_init__(self):
        if self.n_sites < 1:
            raise ModelError("a cluster needs at least one site")
        object.__setattr__(self, "first_parity", parity_code(self.first_parity))
        object.__setattr__(self, "cut_bonds", tuple(sorted(self.cut_bonds)))

    @property
    def bonds(self):
        return [(i, i + 1) for i in range(self.n_sites - 1) if i not in self.cut_bonds]

    @property
    def dim(self):
        return 2 ** self.n_sites

    def parity(self, site):
        return (self.first_parity + site) % 2

    def sites_of(self, parity):
        return [i for i in range(self.n_sites) if self.parity(i) == parity]

    @property
    def label(self):
        return f"{self.n_sites}{PARITY_NAMES[self.first_parity][0]}"

    @classmethod
    def from_label(cls, label):
        """Inverse of `label` for uncut clusters, e.g. "7e"."""
        initials = {name[0]: code for code, name in PARITY_NAMES.items()}
        try:
            return cls(int(label[:-1]), initials[label[-1]])
        except (KeyError, ValueError, IndexError):
            raise ModelError(f"bad cluster label {label!r}") from None

    def __str__(self):
        return f"{self.n_sites}-site {PARITY_NAMES[self.first_parity]}-first"


def enumerate_clusters(K, model):
    """
    Connected sub-chains needed for order-K analysis of the infinite chain:
    lengths 2..K+1 at both parity offsets, plus single sites when the model
    carries on-site fields.
    """
    if K < 1:
        raise ModelError("target order must be at least 1")
    sizes = list(range(2, K + 2))
    if model.has_bath:
        sizes.insert(0, 1)
    return [ClusterSpec(n, p) for n in sizes for p in (ODD, EVEN)]


# --------------------------
# Pulse assignments
# --------------------------
@dataclass(frozen=True)
class AxisPulse:
    """A shaped rotation about cos φ x + sin φ y, with sign and amplitude scale."""
    shape: object
    phase: float = 0.0
    sign: int = 1
    scale: float = 1.0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ModelError("pulse sign must be +1 or -1")
        object.__setattr__(self, "phase", float(self.phase) % (2 * np.pi))

    def amplitude(self, t):
        """Signed amplitude in units of Ω at interval time t."""
        return self.sign * self.scale * self.shape.evaluate(t)

    def with_scale(self, scale):
        return replace(self, scale=scale)


@dataclass(frozen=True)
class Interval:
    """One period tau: an AxisPulse or None (idle) per sublattice."""
    odd: AxisPulse | None = None
    even: AxisPulse | None = None

    def pulse(self, parity):
        return self.odd if parity == ODD else self.even

    @property
    def is_idle(self):
        return self.odd is None and self.even is None

    def pulsed_parities(self):
        return [p for p in (ODD, EVEN) if self.pulse(p) is not None]

    def with_scale(self, scale):
        return Interval(*(p.with_scale(scale) if p else None for p in (self.odd, self.even)))
