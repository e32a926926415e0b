import logging
import os
import sys
from dataclasses import replace

from django.core.management.base import BaseCommand, CommandError

from dif_estimator.config import ExperimentConfig, load_config
from dif_estimator.exceptions import (
    EXIT_NUMERICAL,
    EXIT_USAGE,
    DeformedFieldException,
    StageError,
    exit_code_for,
)
from dif_estimator.utils import atomic_write, output_root

logger = logging.getLogger(__name__)


class DifCommand(BaseCommand):
    """
    Shared plumbing of the dif_estimator subcommands: configuration
    loading, atomic output and the mapping of library errors to exit codes
    (1 usage, 2 configuration, 3 numerical stage failure).
    """

    # stage reported for numerical failures outside the reconstruction pipeline
    stage = None

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def usage_error(message):
            parser.print_usage(sys.stderr)
            parser.exit(EXIT_USAGE, f"{parser.prog}: error: {message}\n")

        parser.error = usage_error
        return parser

    def add_config_argument(self, parser, required=False):
        parser.add_argument(
            "--config",
            required=required,
            help="experiment configuration (TOML); defaults apply without it",
        )

    def load_config(self, options):
        path = options.get("config")
        config = load_config(path) if path else ExperimentConfig()
        grid_overrides = {
            key: options[key]
            for key in ("n", "seed", "sampler")
            if options.get(key) is not None
        }
        if grid_overrides:
            config = replace(config, grid=replace(config.grid, **grid_overrides))
        return config

    def output_path(self, options, default_name, config=None):
        path = options.get("output")
        if path:
            return path
        directory = config.output.directory if config is not None else ""
        return os.path.join(output_root(), directory, default_name)

    def write(self, path, text):
        atomic_write(path, text)
        self.stdout.write(f"wrote {path}")
        return path

    def run(self, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except StageError as e:
            logger.error(f"Stage {e.stage} failed: {e.cause}")
            raise CommandError(
                f"stage {e.stage} failed: {e.cause}", returncode=exit_code_for(e)
            )
        except DeformedFieldException as e:
            code = exit_code_for(e)
            message = f"{type(e).__name__}: {e}"
            if code == EXIT_NUMERICAL:
                message = f"stage {self.stage} failed: {message}"
            logger.error(message)
            raise CommandError(message, returncode=code)
        except OSError as e:
            logger.error(f"I/O failure: {e}")
            raise CommandError(str(e), returncode=EXIT_USAGE)
