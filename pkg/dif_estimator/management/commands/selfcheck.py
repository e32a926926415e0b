from django.core.management.base import CommandError

from dif_estimator.exceptions import EXIT_NUMERICAL, EXIT_USAGE
from dif_estimator.management.commands._base import DifCommand
from dif_estimator.selfcheck import CheckSelector, run_selfcheck


class Command(DifCommand):
    help = "Runs the deterministic invariant checks"
    stage = "selfcheck"

    def add_arguments(self, parser):
        parser.add_argument(
            "checks",
            nargs="*",
            help=f"subset of checks to run: {', '.join(CheckSelector)}",
        )

    def run(self, **options):
        unknown = sorted(set(options["checks"]) - set(CheckSelector))
        if unknown:
            raise CommandError(
                f"unknown checks: {', '.join(unknown)}", returncode=EXIT_USAGE
            )
        results = run_selfcheck(options["checks"] or None)
        for result in results:
            status = "ok" if result.passed else "FAILED"
            self.stdout.write(
                f"{status:6} {result.name:24} {result.seconds:7.2f}s  {result.detail}"
            )
        failed = [result.name for result in results if not result.passed]
        if failed:
            raise CommandError(
                f"stage selfcheck failed: {', '.join(failed)}",
                returncode=EXIT_NUMERICAL,
            )
