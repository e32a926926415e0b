import os
from dataclasses import replace

from dif_estimator.alignment import aligned_error
from dif_estimator.management.commands._base import DifCommand
from dif_estimator.reconstruct import reconstruct_f
from dif_estimator.serializers import dump_rmap, parse_fgrid
from dif_estimator.validators import validate_config


class Command(DifCommand):
    help = "Reconstructs the deformation from an fgrid dump (rmap + metrics)"
    stage = "reconstruct"

    def add_arguments(self, parser):
        parser.add_argument("fgrid", help="input field dump")
        self.add_config_argument(parser)
        parser.add_argument(
            "--exact",
            action="store_true",
            help="inject the catalog mu and tau instead of estimating them",
        )
        parser.add_argument("--output", help="rmap path")

    def run(self, **options):
        config = self.load_config(options)
        with open(options["fgrid"]) as dump:
            sample = parse_fgrid(dump.read())
        if options["exact"]:
            config = replace(
                config, solver=replace(config.solver, exact_injection=True)
            )
        config = replace(config, grid=replace(config.grid, n=sample.n))
        validate_config(config)
        deformation = sample.deformation or config.deformation_map()
        reconstructed = reconstruct_f(sample, config, deformation)
        alignment = aligned_error(
            deformation, reconstructed, config.solver.metric_fraction
        )
        metrics = {
            "aligned_theta": alignment.theta,
            "aligned_shift": alignment.shift,
            "aligned_sup_error": alignment.sup_error,
            "aligned_rms_error": alignment.rms_error,
            "metric_set": alignment.description,
        }
        path = options["output"] or os.path.splitext(options["fgrid"])[0] + ".rmap"
        self.write(
            path, dump_rmap(reconstructed, dict(sample.provenance), metrics)
        )
        self.stdout.write(
            f"aligned sup error {alignment.sup_error:.6g}, "
            f"rms {alignment.rms_error:.6g}"
        )
