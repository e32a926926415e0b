import os

from dif_estimator import constants
from dif_estimator.constants import KernelKind
from dif_estimator.kernels import Kernel
from dif_estimator.management.commands._base import DifCommand
from dif_estimator.qvar import check_bandwidth, smoothed_variation_field
from dif_estimator.serializers import dump_vfield, parse_fgrid
from dif_estimator.validators import BandwidthValidator


class Command(DifCommand):
    help = "Smoothed second-order quadratic variations of an fgrid dump"
    stage = "qvar"

    def add_arguments(self, parser):
        parser.add_argument("fgrid", help="input field dump")
        self.add_config_argument(parser)
        parser.add_argument("--b", type=float, help="bandwidth override")
        parser.add_argument(
            "--kernel", choices=[kind.value for kind in KernelKind]
        )
        parser.add_argument(
            "--output", help="output prefix; one vfield per direction"
        )

    def run(self, **options):
        config = self.load_config(options)
        with open(options["fgrid"]) as dump:
            sample = parse_fgrid(dump.read())
        model = sample.model or config.covariance()
        schedule = config.schedule(model)
        BandwidthValidator("variation", model.gamma)(schedule.exponent)
        b = (
            schedule(sample.n)
            if options["b"] is None
            else check_bandwidth(options["b"])
        )
        kernel = Kernel.factory(options["kernel"] or config.bandwidth.kernel)
        variations = smoothed_variation_field(sample, b, kernel, model.alpha)
        prefix = options["output"] or os.path.splitext(options["fgrid"])[0]
        for name, vector in constants.DIRECTIONS.items():
            self.write(
                f"{prefix}.{name}.vfield",
                dump_vfield(variations, name, vector),
            )
