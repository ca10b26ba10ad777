"""
Exhaustive search over sequences of a given length.

Candidates related by a global sign flip or by relabeling the two
sublattices have the same order; only the lexicographically smallest
member of each orbit (among members expressible in the alphabet) is
classified.
"""

import itertools
import logging

from django.conf import settings

from propagate.integrator import IntervalCache

from .classify import classify_order
from .exceptions import AmbiguousOrderError, SearchBudgetError
from .schedule import format_sequence, parse_sequence

logger = logging.getLogger(__name__)

SUBLATTICE_SWAP = str.maketrans("12", "21")


def _flip(token):
    if token == "I":
        return token
    return "+".join(t[1:] if t.startswith("~") else f"~{t}" for t in token.split("+"))


def _relabel(token):
    if token == "I":
        return token
    parts = token.translate(SUBLATTICE_SWAP).split("+")
    return "+".join(sorted(parts, key=lambda t: t[-1]))


def orbit(candidate):
    flipped = tuple(_flip(t) for t in candidate)
    return [
        candidate,
        flipped,
        tuple(_relabel(t) for t in candidate),
        tuple(_relabel(t) for t in flipped),
    ]


def canonical(candidate, alphabet):
    members = [m for m in orbit(candidate) if all(t in alphabet for t in m)]
    return min(members)


def search_sequences(length, alphabet, shape, model, k_max=None, budget=None, steps=None):
    """
    Classify every canonical sequence of `length` tokens and return the
    (sequence, OrderReport) pairs that reach the highest order, sorted by
    sequence text.
    """
    # one spelling per token so relabeled candidates compare equal
    alphabet = sorted({format_sequence(parse_sequence(token)) for token in alphabet})
    budget = budget or settings.REFOCUS["SEARCH_BUDGET"]
    count = len(alphabet) ** length
    if count > budget:
        raise SearchBudgetError(count, budget)

    members = set(alphabet)
    candidates = [
        c for c in itertools.product(alphabet, repeat=length) if canonical(c, members) == c
    ]
    logger.info("searching %d of %d sequences of length %d", len(candidates), count, length)

    cache = IntervalCache()
    reports = []
    for candidate in candidates:
        text = " ".join(candidate)
        try:
            report = classify_order(
                parse_sequence(text), shape, model, k_max=k_max, steps=steps,
                cache=cache, attribution=False,
            )
        except AmbiguousOrderError as exc:
            logger.warning("skipping %s: %s", text, exc)
            continue
        reports.append((text, report))

    if not reports:
        return []
    best = max(report.table_order for _, report in reports)
    return sorted((pair for pair in reports if pair[1].table_order == best), key=lambda p: p[0])
