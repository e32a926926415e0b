from dif_estimator.constants import SamplerTag
from dif_estimator.management.commands._base import DifCommand
from dif_estimator.serializers import dump_fgrid
from dif_estimator.simulate import sample_field


class Command(DifCommand):
    help = "Draws one seeded sample of the deformed field and writes an fgrid dump"
    stage = "simulate"

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        parser.add_argument("--n", type=int, help="grid density")
        parser.add_argument("--seed", type=int, help="64-bit sample seed")
        parser.add_argument(
            "--sampler", choices=[tag.value for tag in SamplerTag]
        )
        parser.add_argument("--output", help="fgrid path")

    def run(self, **options):
        config = self.load_config(options)
        model = config.covariance()
        deformation = config.deformation_map()
        sample = sample_field(
            model,
            deformation,
            config.grid_spec(),
            config.grid.seed,
            sampler=config.grid.sampler,
            oversample=config.grid.oversample,
        )
        self.write(
            self.output_path(options, f"field_n{sample.n}.fgrid", config),
            dump_fgrid(sample),
        )
