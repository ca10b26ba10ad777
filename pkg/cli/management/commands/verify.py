from cli.base import RefocusCommand
from optimize.design import certify_shape


class Command(RefocusCommand):
    help = "Certify a pulse shape: smoothness, rotation angle and the moments up to its claimed order."
    defaults = {"model": "ising"}

    def add_command_arguments(self, parser):
        parser.add_argument("--shape", help="builtin name or pulse JSON file")
        parser.add_argument("--sigma", type=float, help="width of gauss / herm, in units of tau")
        parser.add_argument("--k-max", type=int, help="order to certify (default: the shape's claim)")

    def run(self, config):
        self.require(config, "shape")
        shape = config.resolve_shape()
        certificate = certify_shape(shape, config.resolve_model(), K=config.k_max, steps=config.steps)
        self.emit_json(config, certificate.to_dict())
        if not certificate.passed:
            self.fail(f"{shape.name} does not certify order {certificate.order}")
