import logging
import sys

from django.core.management.base import BaseCommand, CommandError

from bathframe.exceptions import SamplingError
from matcore.exceptions import CapacityError, RefocusError, RegisterIndexError
from optimize.exceptions import EliminationError, InfeasibleGoalError
from propagate.exceptions import IntegrationError, QuadratureError, UnsupportedOrderError
from pulseshape.exceptions import PulseDomainError, UnknownShapeError
from sequences.exceptions import MissingPulseError, SearchBudgetError, SequenceParseError
from spinmodel.chain import ModelError

from .config import FAILURE, USAGE, RunConfig, dumps_report, write_atomic

logger = logging.getLogger(__name__)

# errors in what was asked for, as opposed to what the computation found
USAGE_ERRORS = (
    CapacityError, RegisterIndexError, ModelError, UnknownShapeError, PulseDomainError, IntegrationError,
    QuadratureError, UnsupportedOrderError, SequenceParseError, SearchBudgetError,
    MissingPulseError, EliminationError, InfeasibleGoalError, SamplingError,
)


class RefocusCommand(BaseCommand):
    """
    Shared flags, --config merging and the exit-status contract:
    0 success, 1 usage or parse error, 2 certification, classification
    or convergence failure.
    """

    requires_system_checks = []
    defaults = {}
    model_options = True

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # argparse would exit 2; bad flags are usage errors
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(f"{exc.__class__.__name__}: {exc}")
            sys.exit(exc.returncode)

    def add_arguments(self, parser):
        parser.add_argument("--config", help="JSON file whose keys mirror the flags")
        parser.add_argument("--output", help="write the report here instead of stdout")
        parser.add_argument("--steps", type=int, help="RK4 steps per interval")
        if self.model_options:
            parser.add_argument("--model", help="ising, xxz, bath or none")
            parser.add_argument("--jz-tau", type=float)
            parser.add_argument("--jperp-tau", type=float)
            parser.add_argument("--bath-b-tau", type=float)
            parser.add_argument("--bath-seed", type=int)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        config = RunConfig.from_options(self.name, options, self.defaults)
        try:
            self.run(config)
        except USAGE_ERRORS as exc:
            raise CommandError(str(exc), returncode=USAGE) from exc
        except RefocusError as exc:
            raise CommandError(str(exc), returncode=FAILURE) from exc

    @property
    def name(self):
        return self.__module__.rsplit(".", 1)[-1]

    def run(self, config):
        raise NotImplementedError

    # --------------------------
    # Output
    # --------------------------
    def emit(self, config, text):
        if config.output:
            write_atomic(config.output, text)
        else:
            self.stdout.write(text, ending="")

    def emit_json(self, config, report):
        self.emit(config, dumps_report(report))

    def fail(self, message):
        raise CommandError(message, returncode=FAILURE)

    def usage(self, message):
        raise CommandError(message, returncode=USAGE)

    def require(self, config, *names):
        for name in names:
            if getattr(config, name, None) is None and config.option(name) is None:
                self.usage(f"--{name.replace('_', '-')} is required")
