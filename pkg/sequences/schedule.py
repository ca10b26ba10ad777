"""
Sequence notation.

    sequence := group (whitespace group)*
    group    := "I" | token ("+" token)*
    token    := ["~"] ("X" | "Y") ("1" | "2")

Each group is one interval tau. Subscript 1 addresses odd sites, 2 even
sites; "~" marks a negative pulse; a sublattice not named in a group
idles. "X1+Y2" pulses both sublattices in the same interval.
"""

import re
from dataclasses import dataclass, replace

import numpy as np

from spinmodel.chain import EVEN, ODD, AxisPulse, Interval

from .exceptions import MissingPulseError, SequenceParseError

TOKEN_RE = re.compile(r"(~?)([XY])([12])")
AXIS_PHASES = {"X": 0.0, "Y": np.pi / 2}
SUBSCRIPTS = {"1": ODD, "2": EVEN}

TABLE1_SEQUENCES = {
    1: "X1",
    2: "X1 X1",
    4: "X1 Y2 ~X1 ~Y2",
    8: "X1 Y2 ~X1 ~Y2 ~Y2 ~X1 Y2 X1",
}


@dataclass(frozen=True)
class PulseSchedule:
    intervals: tuple
    shape: object = None
    period: float = 1.0

    @property
    def duration(self):
        return len(self.intervals) * self.period

    def __len__(self):
        return len(self.intervals)

    def with_shape(self, shape):
        """Bind every pulse of the schedule to `shape`."""
        intervals = tuple(
            Interval(*(replace(p, shape=shape) if p else None for p in (iv.odd, iv.even)))
            for iv in self.intervals
        )
        return replace(self, intervals=intervals, shape=shape)

    def with_scale(self, scale):
        return replace(self, intervals=tuple(iv.with_scale(scale) for iv in self.intervals))

    def require_shape(self):
        for iv in self.intervals:
            for pulse in (iv.odd, iv.even):
                if pulse is not None and pulse.shape is None:
                    raise MissingPulseError("schedule has pulses without a shape")
        return self

    def pulsed_parities(self):
        return sorted({p for iv in self.intervals for p in iv.pulsed_parities()})


def _parse_group(group, offset, shape):
    if group == "I":
        return Interval()
    slots = {}
    position = offset
    for token in group.split("+"):
        match = TOKEN_RE.fullmatch(token)
        if match is None:
            raise SequenceParseError(f"unknown token {token!r}", position)
        bar, axis, digit = match.groups()
        parity = SUBSCRIPTS[digit]
        if parity in slots:
            raise SequenceParseError(f"sublattice {digit} pulsed twice in {group!r}", position)
        slots[parity] = AxisPulse(shape=shape, phase=AXIS_PHASES[axis], sign=-1 if bar else 1)
        position += len(token) + 1
    return Interval(odd=slots.get(ODD), even=slots.get(EVEN))


def parse_sequence(text, shape=None):
    if not text or not text.strip():
        raise SequenceParseError("empty sequence", 0)
    intervals = [
        _parse_group(match.group(), match.start(), shape)
        for match in re.finditer(r"\S+", text)
    ]
    return PulseSchedule(intervals=tuple(intervals), shape=shape)


def _format_pulse(pulse, digit):
    for axis, phase in AXIS_PHASES.items():
        if np.isclose(pulse.phase, phase):
            return f"{'~' if pulse.sign < 0 else ''}{axis}{digit}"
    raise ValueError(f"phase {pulse.phase:.6g} has no sequence notation")


def format_sequence(schedule):
    groups = []
    for iv in schedule.intervals:
        tokens = [
            _format_pulse(pulse, digit)
            for pulse, digit in ((iv.odd, "1"), (iv.even, "2")) if pulse is not None
        ]
        groups.append("+".join(tokens) or "I")
    return " ".join(groups)
