from cli.base import RefocusCommand
from cli.config import parse_angle, write_atomic
from optimize.design import DesignGoal, certify_shape, design_pulse
from pulseshape.shapes import dump_pulse


class Command(RefocusCommand):
    help = "Design a smooth self-refocusing pulse and write it as a pulse JSON file."
    defaults = {"model": "ising", "angle": "pi", "K": 1, "L": 1, "M": 3, "seed": 0}

    def add_command_arguments(self, parser):
        parser.add_argument("--angle", help="rotation angle: pi, 2pi, pi/2 or radians")
        parser.add_argument("--K", type=int, help="self-refocusing order")
        parser.add_argument("--L", type=int, help="number of vanishing even end derivatives")
        parser.add_argument("--M", type=int, help="number of cosine harmonics")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--name")
        parser.add_argument("--log", help="convergence log CSV (default: next to --output)")

    def run(self, config):
        goal = DesignGoal(
            angle=parse_angle(config.option("angle")),
            K=int(config.option("K")), L=int(config.option("L")), M=int(config.option("M")),
            model=config.resolve_model(), steps=config.steps,
        )
        result = design_pulse(goal, seed=config.seed, name=config.option("name"))

        # the best-so-far shape is written even when the search did not converge
        self.emit(config, dump_pulse(result.shape))
        log = config.option("log") or (f"{config.output.rsplit('.', 1)[0]}.log.csv" if config.output else None)
        if log:
            write_atomic(log, result.log_csv())

        if not result.converged:
            self.fail(f"no convergence for seed {result.seed}: best objective {result.objective:.3g}")
        certificate = certify_shape(result.shape, goal.model, K=goal.K, angle=goal.angle)
        if not certificate.passed:
            self.fail(f"{result.shape.name} converged but does not certify order {goal.K}")
        if config.output:
            self.stdout.write(f"{result.shape.name}: objective {result.objective:.3g}, certified order {goal.K}")
