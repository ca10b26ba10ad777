"""
The refocusing-order grid: three pulse shapes, the four published
sequences and three models, with the bundled expected values.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from django.conf import settings

from pulseshape.builtins import builtin
from propagate.integrator import IntervalCache
from spinmodel.chain import preset

from .classify import classify_order
from .exceptions import AmbiguousOrderError
from .schedule import TABLE1_SEQUENCES, parse_sequence

logger = logging.getLogger(__name__)

EXPECTED_PATH = Path(__file__).resolve().parent / "data" / "table1.csv"

TABLE1_SHAPES = ("gauss", "S1", "Q1")
TABLE1_MODELS = ("ising", "xxz", "bath")
GAUSS_WIDTHS = (1 / 10, 1 / 8, 1 / 6)


@dataclass
class TableCell:
    shape: str
    sequence_id: int
    model: str
    order: int | None
    asterisk: bool = False
    width_sensitive: bool = False
    error: str = ""

    @property
    def key(self):
        return (self.shape, self.sequence_id, self.model)

    @property
    def ambiguous(self):
        return self.order is None


def load_expected(path=EXPECTED_PATH):
    """{(shape, sequence id, model): (order, asterisk)} from the bundled CSV."""
    with Path(path).open(newline="") as fh:
        return {
            (row["shape"], int(row["sequence_id"]), row["model"]):
                (int(row["order"]), row["asterisk"] == "1")
            for row in csv.DictReader(fh)
        }


def _classify(sequence, shape, model, steps, cache):
    report = classify_order(parse_sequence(sequence), shape, model, steps=steps, cache=cache,
                            attribution=False)
    return report.table_order, report.asterisk


def table_cell(shape_name, sequence_id, model_name, steps=None, widths=GAUSS_WIDTHS):
    sequence = TABLE1_SEQUENCES[sequence_id]
    model = preset(model_name)
    cell = TableCell(shape_name, sequence_id, model_name, order=None)
    cache = IntervalCache()
    try:
        if shape_name != "gauss":
            cell.order, cell.asterisk = _classify(sequence, builtin(shape_name), model, steps, cache)
            return cell
        results = [
            _classify(sequence, builtin("gauss", sigma=w), model, steps, IntervalCache())
            for w in widths
        ]
    except AmbiguousOrderError as exc:
        cell.error = str(exc)
        logger.warning("ambiguous cell %s: %s", cell.key, exc)
        return cell

    # reported at the default width when it is among the sampled ones
    default = settings.REFOCUS["GAUSS_SIGMA"]
    cell.order, cell.asterisk = results[widths.index(default)] if default in widths else results[0]
    cell.width_sensitive = len(set(results)) > 1
    if cell.width_sensitive:
        logger.warning("gauss cell %s depends on the width: %s", cell.key, results)
    return cell


def reproduce_table1(shapes=TABLE1_SHAPES, sequence_ids=tuple(TABLE1_SEQUENCES),
                     models=TABLE1_MODELS, steps=None, widths=GAUSS_WIDTHS):
    cells = []
    for shape in shapes:
        for model in models:
            for sid in sequence_ids:
                cell = table_cell(shape, sid, model, steps, widths)
                logger.info("table %s/%d/%s: %s%s", shape, sid, model, cell.order,
                            "*" if cell.asterisk else "")
                cells.append(cell)
    return cells
