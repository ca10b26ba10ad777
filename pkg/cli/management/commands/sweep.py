import csv
import io

import numpy as np

from cli.base import RefocusCommand
from cli.config import parse_values
from sequences.classify import classify_order
from sequences.experiments import bb1_chain_sweep, bb1_sweep, fit_slope, scaling_sweep
from sequences.schedule import parse_sequence

EXPERIMENTS = ("scaling", "bb1", "bb1-chain")


def two_pi_partner(shape):
    """The 2π pulse of the same family; self-refocusing shapes are played twice in one interval."""
    if shape.claimed_K >= 1:
        return shape.compressed(2)
    return shape.rescaled(2 * np.pi)


class Command(RefocusCommand):
    help = "Error-versus-parameter sweeps as CSV for log-log plots: scaling law, BB1 mismatch, BB1 coupling."
    defaults = {
        "model": "ising", "shape": "Q1", "eps": "0.01:0.1:10", "jz_values": "0.05:0.4:8", "epsilon": 0.0,
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--experiment", choices=EXPERIMENTS)
        parser.add_argument("--sequence")
        parser.add_argument("--shape")
        parser.add_argument("--sigma", type=float)
        parser.add_argument("--two-pi-shape", help="2π pulse for BB1 (default: same family)")
        parser.add_argument("--k-max", type=int, help="truncation order for the scaling law")
        parser.add_argument("--eps", help="amplitude mismatches, start:stop:count or a list")
        parser.add_argument("--jz-values", help="couplings J·tau, start:stop:count or a list")
        parser.add_argument("--epsilon", type=float, help="fixed mismatch for bb1-chain")

    def run(self, config):
        self.require(config, "experiment")
        experiment = config.option("experiment")
        shape = config.resolve_shape()

        slope = None
        if experiment == "scaling":
            self.require(config, "sequence")
            schedule = parse_sequence(config.sequence, shape)
            model = config.resolve_model()
            K = config.k_max or classify_order(schedule, shape, model, attribution=False).order
            if K < 1:
                self.usage(f"{config.sequence} does not refocus on {model.name}; nothing to truncate")
            rows, slope = scaling_sweep(
                schedule, model, K, parse_values(config.option("jz_values")), steps=config.steps,
            )
            header = ["j_tau", "error"]
        else:
            partner = config.option("two_pi_shape")
            two_pi = config.resolve_shape(partner) if partner else two_pi_partner(shape)
            if experiment == "bb1":
                rows = bb1_sweep(shape, two_pi, parse_values(config.option("eps")), steps=config.steps)
                header = ["epsilon", "error"]
            else:
                rows = bb1_chain_sweep(
                    shape, two_pi, parse_values(config.option("jz_values")),
                    epsilon=float(config.option("epsilon")), steps=config.steps,
                )
                header = ["jz_tau", "error"]
            if len(rows) > 1 and all(e > 0 for _, e in rows):
                slope = fit_slope(*zip(*rows))

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for x, error in rows:
            writer.writerow([f"{x:.12g}", f"{error:.12g}"])
        self.emit(config, buffer.getvalue())
        if config.output and slope is not None:
            self.stdout.write(f"fitted log-log slope {slope:.4g}")
