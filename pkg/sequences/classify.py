"""
Refocusing-order classification.

The order of a sequence is the number K of perturbative moments R_1..R_K
that vanish at the end of the schedule on every cluster of the infinite
chain. R_k lives on clusters of at most k + 1 sites, so cluster sizes are
visited in increasing order and the search stops as soon as the lowest
nonvanishing order is settled. A residual between the zero and nonzero
thresholds counts only when it clears its own step-doubling error.
"""

import logging
from dataclasses import dataclass, field

from django.conf import settings

from matcore.exceptions import CapacityError
from matcore.ops import frobenius_norm
from propagate.integrator import IntervalCache, integrate_clusters, integrate_perturbative
from spinmodel.chain import EVEN, ODD, ClusterSpec, enumerate_clusters

from .exceptions import AmbiguousOrderError
from .schedule import format_sequence

logger = logging.getLogger(__name__)


@dataclass
class OrderReport:
    sequence: str
    shape: str
    model: str
    order: int
    k_max: int
    # order k -> {cluster label: ‖R_k‖_F}
    residuals: dict
    thresholds: tuple
    # order k -> {coupling term: max ‖R_k‖_F with only that term active}
    attribution: dict = field(default_factory=dict)
    pulsed_order: int | None = None
    # step-doubling error behind a residual resolved under the nonzero threshold
    noise_floor: float | None = None

    @property
    def asterisk(self):
        return self.pulsed_order is not None and self.pulsed_order > self.order

    @property
    def table_order(self):
        """The published-table entry: the pulsed-site order when it is higher."""
        return self.pulsed_order if self.asterisk else self.order

    def max_residual(self, k):
        return max(self.residuals.get(k, {}).values(), default=0.0)

    def to_dict(self):
        labels = sorted({label for row in self.residuals.values() for label in row})
        return {
            "sequence": self.sequence,
            "shape": self.shape,
            "model": self.model,
            "order": self.order,
            "pulsed_order": self.pulsed_order,
            "asterisk": self.asterisk,
            "k_max": self.k_max,
            "thresholds": list(self.thresholds),
            "noise_floor": self.noise_floor,
            "clusters": labels,
            "residuals": [
                [self.residuals[k].get(label) for label in labels]
                for k in sorted(self.residuals)
            ],
            "attribution": {
                str(k): dict(terms) for k, terms in sorted(self.attribution.items())
            },
        }


def _residual_table(schedule, model, k_max, steps, cache, zero):
    """Per-order, per-cluster residual norms with cluster-size pruning."""
    if not model.active_terms():
        labels = [c.label for c in enumerate_clusters(k_max, model)]
        return {k: dict.fromkeys(labels, 0.0) for k in range(1, k_max + 1)}, None

    table = {}
    bound = None
    sizes = ([1] if model.has_bath else []) + list(range(2, k_max + 2))
    for size in sizes:
        # orders below a nonvanishing R_b live on clusters of at most b sites
        if bound is not None and size > bound:
            break
        limit = bound or k_max
        clusters = [ClusterSpec(size, ODD), ClusterSpec(size, EVEN)]
        results = integrate_clusters(clusters, model, schedule, limit, steps, cache)
        for cluster, result in zip(clusters, results):
            for k, norm in enumerate(result.residual_norms(), start=1):
                table.setdefault(k, {})[cluster.label] = norm
        bound = next(
            (k for k in sorted(table) if k <= limit and max(table[k].values()) > zero),
            None,
        )
    return table, bound


def noise_floor(schedule, model, cluster, k, steps, cache=None):
    """
    Step-doubling estimate of the discretization error in ‖R_k‖: the
    distance between R_k at `steps` and at half (or, near the minimum,
    twice) that many steps per interval.
    """
    other = steps // 2 if steps // 2 >= settings.REFOCUS["MIN_STEPS"] else 2 * steps
    fine, coarse = (
        integrate_perturbative(cluster, model, schedule, k, n, cache) for n in (steps, other)
    )
    return frobenius_norm(fine.r[k - 1] - coarse.r[k - 1])


def _noise(schedule, model, steps, cache):
    def measure(label, k):
        return noise_floor(schedule, model, ClusterSpec.from_label(label), k, steps, cache)
    return measure


def _settle(table, bound, k_max, nonzero, noise):
    """
    The order below the lowest nonvanishing R_b. A residual under the
    nonzero threshold still counts when it stands NOISE_MARGIN times above
    its own step-doubling error; otherwise the cell is ambiguous.
    """
    if bound is None:
        return k_max, None
    label, worst = max(table[bound].items(), key=lambda item: item[1])
    if worst > nonzero:
        return bound - 1, None
    floor = noise(label, bound)
    if worst <= settings.REFOCUS["NOISE_MARGIN"] * floor:
        raise AmbiguousOrderError(bound, label, worst)
    logger.info("R_%d = %.3g on %s resolved against noise floor %.3g", bound, worst, label, floor)
    return bound - 1, floor


def _attribution(schedule, model, order, k_max, steps):
    terms = model.active_terms()
    if len(terms) < 2:
        return {}
    K = min(order + 1, k_max)
    out = {}
    for term in terms:
        single = model.only(term)
        results = integrate_clusters(enumerate_clusters(K, single), single, schedule, K, steps)
        for k in range(1, K + 1):
            out.setdefault(k, {})[term] = max(r.residual_norms()[k - 1] for r in results)
    return out


def classify_order(schedule, shape, model, k_max=None, steps=None, cache=None, attribution=True):
    config = settings.REFOCUS
    k_max = k_max or config["MAX_ORDER"]
    if not 1 <= k_max <= config["MAX_ORDER"]:
        raise CapacityError(f"k_max must lie in 1..{config['MAX_ORDER']}, got {k_max}")
    steps = steps or config["CLASSIFY_STEPS_PER_INTERVAL"]
    zero, nonzero = config["ZERO_THRESHOLD"], config["NONZERO_THRESHOLD"]
    cache = cache if cache is not None else IntervalCache()

    schedule = schedule.with_shape(shape) if shape is not None else schedule.require_shape()
    table, bound = _residual_table(schedule, model, k_max, steps, cache, zero)
    order, floor = _settle(table, bound, k_max, nonzero, _noise(schedule, model, steps, cache))

    pulsed_order = None
    if model.has_bath:
        parities = schedule.pulsed_parities()
        if set(parities) == set(model.bath.parities):
            pulsed_order = order
        else:
            pulsed = model.restrict_bath(parities)
            pulsed_table, pulsed_bound = _residual_table(schedule, pulsed, k_max, steps, cache, zero)
            pulsed_order, _ = _settle(
                pulsed_table, pulsed_bound, k_max, nonzero, _noise(schedule, pulsed, steps, cache),
            )

    report = OrderReport(
        sequence=format_sequence(schedule),
        shape=getattr(schedule.shape, "name", ""),
        model=model.name,
        order=order,
        k_max=k_max,
        residuals=table,
        thresholds=(zero, nonzero),
        attribution=_attribution(schedule, model, order, k_max, steps) if attribution else {},
        pulsed_order=pulsed_order,
        noise_floor=floor,
    )
    logger.info(
        "%s / %s / %s: order %d%s", report.sequence, report.shape, report.model,
        report.order, f" (pulsed sites {pulsed_order})" if pulsed_order is not None else "",
    )
    return report
