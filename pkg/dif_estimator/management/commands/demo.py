import os

from dif_estimator.demo import run_demo
from dif_estimator.management.commands._base import DifCommand
from dif_estimator.utils import output_root
from dif_estimator.validators import validate_config


class Command(DifCommand):
    help = "Seeded demonstration run with plot-ready field and polyline dumps"
    stage = "demo"

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        parser.add_argument("--n", type=int, help="grid density")
        parser.add_argument("--seed", type=int, help="64-bit sample seed")
        parser.add_argument("--output", help="output directory")

    def run(self, **options):
        config = validate_config(self.load_config(options))
        directory = options["output"] or os.path.join(
            output_root(), config.output.directory, "demo"
        )
        paths, alignment = run_demo(config, directory)
        for path in paths:
            self.stdout.write(f"wrote {path}")
        self.stdout.write(f"aligned sup error {alignment.sup_error:.6g}")
