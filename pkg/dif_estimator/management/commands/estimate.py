import os

from dif_estimator.dilatation import estimate_dilatation_field
from dif_estimator.management.commands._base import DifCommand
from dif_estimator.qvar import check_bandwidth
from dif_estimator.serializers import dump_dfield, parse_fgrid
from dif_estimator.validators import BandwidthValidator


class Command(DifCommand):
    help = "Estimates the complex dilatation and log-scale from an fgrid dump"
    stage = "estimate"

    def add_arguments(self, parser):
        parser.add_argument("fgrid", help="input field dump")
        self.add_config_argument(parser)
        parser.add_argument("--b", type=float, help="bandwidth override")
        parser.add_argument(
            "--derivative",
            action="store_true",
            help="also write the complex derivative of mu",
        )
        parser.add_argument("--output", help="output prefix")

    def run(self, **options):
        config = self.load_config(options)
        with open(options["fgrid"]) as dump:
            sample = parse_fgrid(dump.read())
        model = sample.model or config.covariance()
        schedule = config.schedule(model)
        mode = "derivative" if options["derivative"] else "variation"
        BandwidthValidator(mode, model.gamma)(schedule.exponent)
        b = (
            schedule(sample.n)
            if options["b"] is None
            else check_bandwidth(options["b"])
        )
        dilatation = estimate_dilatation_field(
            sample,
            None,
            b,
            config.kernel(),
            model.alpha,
            clamp=config.solver.mu_clamp,
            with_derivative=options["derivative"],
        )
        provenance = dict(sample.provenance)
        prefix = options["output"] or os.path.splitext(options["fgrid"])[0]
        names = ("mu", "tau", "dmu") if options["derivative"] else ("mu", "tau")
        for name in names:
            self.write(
                f"{prefix}.{name}.dfield",
                dump_dfield(dilatation, name, provenance),
            )
