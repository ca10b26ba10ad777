import csv
import io

from cli.base import RefocusCommand
from sequences.schedule import TABLE1_SEQUENCES
from sequences.table import GAUSS_WIDTHS, TABLE1_MODELS, TABLE1_SHAPES, load_expected, reproduce_table1

COLUMNS = ["shape", "sequence_id", "model", "order", "asterisk", "width_sensitive", "expected", "match"]


class Command(RefocusCommand):
    help = "Reproduce the refocusing-order grid for three shapes, four sequences and three models."
    model_options = False

    def add_command_arguments(self, parser):
        parser.add_argument("--shapes", nargs="+", choices=TABLE1_SHAPES)
        parser.add_argument("--models", nargs="+", choices=TABLE1_MODELS)
        parser.add_argument("--ids", nargs="+", type=int, choices=sorted(TABLE1_SEQUENCES))

    def run(self, config):
        cells = reproduce_table1(
            shapes=config.option("shapes") or TABLE1_SHAPES,
            sequence_ids=config.option("ids") or tuple(TABLE1_SEQUENCES),
            models=config.option("models") or TABLE1_MODELS,
            steps=config.steps,
            widths=GAUSS_WIDTHS,
        )
        expected = load_expected()

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        for cell in cells:
            want = expected.get(cell.key)
            writer.writerow([
                cell.shape, cell.sequence_id, cell.model,
                "" if cell.ambiguous else cell.order,
                int(cell.asterisk), int(cell.width_sensitive),
                f"{want[0]}{'*' if want[1] else ''}" if want else "",
                int(want == (cell.order, cell.asterisk)) if want else "",
            ])
        self.emit(config, buffer.getvalue())

        ambiguous = [c for c in cells if c.ambiguous]
        if ambiguous:
            self.fail("ambiguous cells: " + "; ".join(
                f"{c.shape}/{c.sequence_id}/{c.model} ({c.error})" for c in ambiguous
            ))
