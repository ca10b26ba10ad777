from cli.base import RefocusCommand
from sequences.classify import classify_order
from sequences.schedule import parse_sequence


class Command(RefocusCommand):
    help = "Determine the refocusing order of a pulse sequence."
    defaults = {"model": "ising"}

    def add_command_arguments(self, parser):
        parser.add_argument("--sequence", help='e.g. "X1 Y2 ~X1 ~Y2"')
        parser.add_argument("--shape")
        parser.add_argument("--sigma", type=float)
        parser.add_argument("--k-max", type=int)
        parser.add_argument("--no-attribution", action="store_true", default=None)

    def run(self, config):
        self.require(config, "sequence", "shape")
        schedule = parse_sequence(config.sequence)
        report = classify_order(
            schedule, config.resolve_shape(), config.resolve_model(),
            k_max=config.k_max, steps=config.steps,
            attribution=not config.option("no_attribution"),
        )
        self.emit_json(config, report.to_dict())
