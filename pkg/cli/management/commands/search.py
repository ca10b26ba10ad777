import re

from cli.base import RefocusCommand
from sequences.search import search_sequences


class Command(RefocusCommand):
    help = "Exhaustively search sequences of a given length for the highest refocusing order."
    defaults = {"model": "ising", "alphabet": "X1,~X1,Y1,~Y1,X2,~X2,Y2,~Y2"}

    def add_command_arguments(self, parser):
        parser.add_argument("--length", type=int)
        parser.add_argument("--alphabet", help="tokens separated by commas or spaces")
        parser.add_argument("--shape")
        parser.add_argument("--sigma", type=float)
        parser.add_argument("--k-max", type=int)
        parser.add_argument("--budget", type=int)

    def run(self, config):
        self.require(config, "length", "shape")
        length = int(config.option("length"))
        if length < 1:
            self.usage("--length must be positive")
        alphabet = config.option("alphabet")
        if isinstance(alphabet, str):
            alphabet = [t for t in re.split(r"[,\s]+", alphabet) if t]
        best = search_sequences(
            length, alphabet, config.resolve_shape(), config.resolve_model(),
            k_max=config.k_max, budget=config.option("budget"), steps=config.steps,
        )
        self.emit_json(config, {
            "length": length,
            "alphabet": sorted(alphabet),
            "order": best[0][1].table_order if best else None,
            "sequences": [
                {
                    "sequence": text,
                    "order": report.order,
                    "pulsed_order": report.pulsed_order,
                    "asterisk": report.asterisk,
                }
                for text, report in best
            ],
        })
