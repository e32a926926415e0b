import os

from django.test import SimpleTestCase

from dif_estimator.config import (
    ExperimentConfig,
    GridConfig,
    SweepConfig,
    dump_config,
    load_config,
    parse_config,
)
from dif_estimator.constants import RunMode
from dif_estimator.exceptions import ConfigValidationError
from dif_estimator.grid import GridSpec
from dif_estimator.kernels import Kernel
from dif_estimator.tests.utils import create_solver_config
from dif_estimator.validators import (
    BandwidthValidator,
    disk_fits,
    evaluable_bounds,
    validate_config,
)

CONFIG_ROOT = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
    "config",
)


class TestConfig(SimpleTestCase):
    def test_empty_document_gives_the_defaults(self):
        config = parse_config("")

        self.assertEqual(config, ExperimentConfig())
        self.assertEqual(config.grid.n, 96)
        self.assertIs(config.mode, RunMode.RECONSTRUCTION)

    def test_arrays_become_tuples(self):
        config = parse_config("[solver]\ncenter = [0.4, 0.6]\n")

        self.assertEqual(config.solver.center, (0.4, 0.6))
        self.assertEqual(config.solver.disk_center, 0.4 + 0.6j)

    def test_unknown_section_is_rejected(self):
        with self.assertRaises(ConfigValidationError):
            parse_config("[plotting]\ndpi = 300\n")

    def test_unknown_key_is_rejected(self):
        with self.assertRaises(ConfigValidationError):
            parse_config("[grid]\ndensity = 64\n")

    def test_unknown_kernel_is_rejected(self):
        with self.assertRaises(ConfigValidationError):
            parse_config('[bandwidth]\nkernel = "epanechnikov"\n')

    def test_malformed_document_is_rejected(self):
        with self.assertRaises(ConfigValidationError):
            parse_config("[grid\nn = 64\n")

    def test_missing_file_is_a_config_error(self):
        with self.assertRaises(ConfigValidationError):
            load_config(os.path.join(CONFIG_ROOT, "missing.toml"))

    def test_dump_round_trip(self):
        config = parse_config(
            '[deformation]\nkind = "quadratic"\nepsilon = [0.15, 0.0]\n'
            "[sweep]\nn_values = [48, 64]\n"
        )

        self.assertEqual(parse_config(dump_config(config)), config)

    def test_bandwidth_follows_the_schedule(self):
        config = parse_config("[bandwidth]\nconstant = 0.5\nexponent = 0.2\n")

        self.assertAlmostEqual(config.bandwidth_for(32), 0.5 * 32 ** -0.2)

    def test_shipped_configurations_are_valid(self):
        for name in ("acceptance.toml", "affine_exact.toml", "variation.toml"):
            config = load_config(os.path.join(CONFIG_ROOT, name))

            self.assertIs(validate_config(config), config, name)


class TestBandwidthValidator(SimpleTestCase):
    def test_variation_runs_allow_exponents_below_one_third(self):
        validator = BandwidthValidator("variation")

        self.assertEqual(validator(0.3), 0.3)
        with self.assertRaises(ConfigValidationError):
            validator(0.34)

    def test_reconstruction_runs_are_limited_by_gamma(self):
        validator = BandwidthValidator("reconstruction", gamma=0.2)

        self.assertEqual(validator.limit, 0.2)
        with self.assertRaises(ConfigValidationError):
            validator(0.21)

    def test_derivative_runs_stay_below_one_quarter(self):
        self.assertEqual(BandwidthValidator("derivative", gamma=0.9).limit, 0.25)

    def test_missing_or_nonpositive_exponent_is_rejected(self):
        validator = BandwidthValidator("variation")

        for exponent in (None, 0.0, -0.1):
            with self.assertRaises(ConfigValidationError):
                validator(exponent)


class TestValidateConfig(SimpleTestCase):
    def test_default_configuration_is_valid(self):
        config = ExperimentConfig()

        self.assertIs(validate_config(config), config)

    def test_evaluable_bounds(self):
        bounds = evaluable_bounds(GridSpec(64), 0.2, Kernel.factory("triweight"))

        for value, expected in zip(bounds, (13 / 64, 13 / 64, 51 / 64, 51 / 64)):
            self.assertAlmostEqual(value, expected)

    def test_disk_fits(self):
        self.assertTrue(disk_fits(0.5 + 0.5j, 0.3, (0.2, 0.2, 0.8, 0.8)))
        self.assertFalse(disk_fits(0.5 + 0.5j, 0.3, (0.25, 0.2, 0.8, 0.8)))
        self.assertTrue(disk_fits(0.5 + 0.5j, 0.3, (0.25, 0.2, 0.8, 0.8), slack=0.05))

    def test_failing_deformation_is_a_config_error(self):
        config = parse_config('[deformation]\nkind = "quadratic"\nepsilon = 0.8\n')

        with self.assertRaises(ConfigValidationError):
            validate_config(config)

    def test_gaussian_kernel_is_refused_for_reconstruction(self):
        config = parse_config('[bandwidth]\nkernel = "gaussian"\n')

        with self.assertRaises(ConfigValidationError):
            validate_config(config)

    def test_gaussian_kernel_is_allowed_for_variation(self):
        config = parse_config('[bandwidth]\nkernel = "gaussian"\nmode = "variation"\n')

        self.assertIs(validate_config(config), config)

    def test_sweep_densities_must_increase(self):
        config = ExperimentConfig(sweep=SweepConfig(n_values=(96, 64)))

        with self.assertRaises(ConfigValidationError):
            validate_config(config)

    def test_margin_must_hold_second_increments(self):
        config = ExperimentConfig(grid=GridConfig(margin=1))

        with self.assertRaises(ConfigValidationError):
            validate_config(config)

    def test_disk_outside_the_domain_is_rejected(self):
        config = ExperimentConfig(solver=create_solver_config(radius=0.6))

        with self.assertRaises(ConfigValidationError):
            validate_config(config)

    def test_disk_outside_the_evaluable_interior_is_rejected(self):
        config = ExperimentConfig(
            grid=GridConfig(n=32),
            sweep=SweepConfig(n_values=(32,)),
            solver=create_solver_config(radius=0.35),
        )

        with self.assertRaises(ConfigValidationError):
            validate_config(config)

    def test_exact_injection_skips_the_evaluable_interior_check(self):
        config = ExperimentConfig(
            grid=GridConfig(n=32),
            sweep=SweepConfig(n_values=(32,)),
            solver=create_solver_config(radius=0.35, exact_injection=True),
        )

        self.assertIs(validate_config(config), config)
