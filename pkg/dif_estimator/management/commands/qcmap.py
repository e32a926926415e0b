from dif_estimator.bergman import DiskQuadrature
from dif_estimator.management.commands._base import DifCommand
from dif_estimator.qcmap import build_qcmap
from dif_estimator.serializers import dump_qcmap, parse_dfield


class Command(DifCommand):
    help = "Builds the normalized quasiconformal map of a mu dfield dump"
    stage = "qcmap"

    def add_arguments(self, parser):
        parser.add_argument("dfield", help="input dump with field=mu")
        self.add_config_argument(parser)
        parser.add_argument("--output", help="qcmap dump path")

    def run(self, **options):
        config = self.load_config(options)
        with open(options["dfield"]) as dump:
            dilatation = parse_dfield(dump.read())
        solver = config.solver
        qcmap = build_qcmap(
            dilatation,
            center=solver.disk_center,
            radius=solver.radius,
            outer_radius=solver.outer_radius_factor * solver.radius,
            side=solver.box_factor * 2 * solver.radius,
            resolution=solver.resolution,
            tol=solver.tolerance,
            max_iter=solver.max_iterations,
            riemann_degree=solver.riemann_degree,
            boundary_tolerance=solver.boundary_tolerance,
            quadrature=DiskQuadrature(
                solver.quadrature_radial, solver.quadrature_angular
            ),
            inverse_margin=solver.inverse_margin,
        )
        self.write(
            self.output_path(options, "map.qcmap", config), dump_qcmap(qcmap)
        )
