from dif_estimator.management.commands._base import DifCommand
from dif_estimator.sweep import convergence_sweep
from dif_estimator.validators import validate_config


class Command(DifCommand):
    help = "Runs a convergence sweep over grid densities and writes a CSV"
    stage = "sweep"

    def add_arguments(self, parser):
        self.add_config_argument(parser, required=True)
        parser.add_argument("--output", help="CSV path")

    def run(self, **options):
        config = validate_config(self.load_config(options))
        table = convergence_sweep(config)
        self.write(self.output_path(options, "sweep.csv", config), table.to_csv())
        failed = [row["n"] for row in table.rows if row.get("error")]
        if failed:
            self.stderr.write(f"rows with stage failures: {failed}")
