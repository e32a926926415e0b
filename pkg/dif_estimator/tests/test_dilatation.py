import math

import numpy as np
from django.test import SimpleTestCase

from dif_estimator.deformations import conjugate_quadratic, identity
from dif_estimator.dilatation import (
    DilatationField,
    EllipseCoefficients,
    directional_scale,
    dmu_from_variations,
    ellipse_coefficients,
    estimate_dilatation_field,
    estimate_dmu,
    fill_masked,
    mu_tau_from_ellipse,
    mu_tau_from_variations,
)
from dif_estimator.exceptions import DegenerateEllipse, VariationDomainError
from dif_estimator.grid import GridSpec
from dif_estimator.kernels import Kernel
from dif_estimator.qvar import g_true
from dif_estimator.selfcheck import ellipse_round_trip_errors, random_jacobians
from dif_estimator.simulate import sample_exact
from dif_estimator.tests.utils import create_model, create_stretch


def exact_variations(deformation, z, alpha=1.0):
    return {
        name: g_true(deformation, z, h, alpha)
        for name, h in (("x", (1, 0)), ("y", (0, 1)), ("diagonal", (1, 1)))
    }


class TestEllipseAlgebra(SimpleTestCase):
    def test_directional_scale_of_the_isotropic_constant_is_one(self):
        for alpha in (0.5, 1.0, 1.7):
            self.assertAlmostEqual(
                float(directional_scale(8 - 2 ** (alpha + 1), alpha)), 1.0
            )

    def test_directional_scale_for_alpha_one(self):
        self.assertAlmostEqual(float(directional_scale(8.0, 1.0)), 2.0)
        self.assertEqual(float(directional_scale(0.0, 1.0)), 0.0)

    def test_negative_variation_is_rejected(self):
        with self.assertRaises(VariationDomainError):
            directional_scale(-1.0, 1.0)

    def test_ellipse_of_the_stretch(self):
        ellipse = ellipse_coefficients(2.0, 1.0, math.sqrt(5))

        self.assertAlmostEqual(float(ellipse.a), 4.0)
        self.assertAlmostEqual(float(ellipse.b), 0.0)
        self.assertAlmostEqual(float(ellipse.c), 1.0)

    def test_ellipse_of_the_identity(self):
        ellipse = ellipse_coefficients(1.0, 1.0, math.sqrt(2))

        self.assertAlmostEqual(float(ellipse.a), 1.0)
        self.assertAlmostEqual(float(ellipse.b), 0.0)
        self.assertAlmostEqual(float(ellipse.c), 1.0)

    def test_triangle_violation_is_degenerate(self):
        with self.assertRaises(DegenerateEllipse):
            ellipse_coefficients(1.0, 1.0, 2.5)

    def test_lenient_ellipse_reports_degenerate_points(self):
        ellipse = ellipse_coefficients(
            np.array([1.0, 1.0]), np.array([1.0, 1.0]), np.array([1.4, 2.5]), strict=False
        )

        np.testing.assert_array_equal(ellipse.valid, [True, False])

    def test_mu_tau_of_the_stretch(self):
        mu, tau = mu_tau_from_ellipse(
            EllipseCoefficients(a=np.array(4.0), b=np.array(0.0), c=np.array(1.0))
        )

        self.assertAlmostEqual(complex(mu), 1 / 3)
        self.assertAlmostEqual(float(tau), math.log(1.5))

    def test_mu_tau_of_the_circle(self):
        mu, tau = mu_tau_from_ellipse(
            EllipseCoefficients(a=np.array(1.0), b=np.array(0.0), c=np.array(1.0))
        )

        self.assertAlmostEqual(complex(mu), 0)
        self.assertAlmostEqual(float(tau), 0)

    def test_mu_is_clamped_inside_the_unit_disk(self):
        mu, _ = mu_tau_from_ellipse(
            EllipseCoefficients(a=np.array(1e8), b=np.array(0.0), c=np.array(1e-8)),
            clamp=1e-3,
        )

        self.assertLessEqual(abs(complex(mu)), 1 - 1e-3 + 1e-15)

    def test_random_jacobians_round_trip(self):
        errors = ellipse_round_trip_errors(random_jacobians(10000))

        for name, error in errors.items():
            self.assertLess(error, 1e-10, name)

    def test_exact_variations_give_exact_dilatation(self):
        z = np.array([0.3 + 0.4j, 0.7 + 0.2j])

        mu, tau, mask = mu_tau_from_variations(exact_variations(create_stretch(), z), 1.0)

        np.testing.assert_allclose(mu, 1 / 3, atol=1e-12)
        np.testing.assert_allclose(tau, math.log(1.5), atol=1e-12)
        self.assertFalse(mask.any())

    def test_exact_variations_give_varying_dilatation(self):
        f = conjugate_quadratic(0.2 + 0.1j)
        z = np.array([0.3 + 0.4j, 0.8 + 0.6j])

        mu, tau, _ = mu_tau_from_variations(exact_variations(f, z, alpha=0.8), 0.8)

        np.testing.assert_allclose(mu, f.mu(z), atol=1e-12)
        np.testing.assert_allclose(tau, f.tau(z), atol=1e-12)

    def test_chain_rule_derivative_of_mu(self):
        f = conjugate_quadratic(0.1 + 0.05j)
        z, step = np.array([0.4 + 0.3j, 0.6 + 0.7j]), 1e-5
        variations = exact_variations(f, z)
        for u, expected in ((1, 0.2 + 0.1j), (1j, -1j * (0.2 + 0.1j))):
            forward = exact_variations(f, z + u * step)
            backward = exact_variations(f, z - u * step)
            derivatives = {
                name: (forward[name] - backward[name]) / (2 * step)
                for name in variations
            }

            dmu = dmu_from_variations(variations, derivatives, 1.0)

            np.testing.assert_allclose(dmu, expected, atol=1e-6)

    def test_masked_entries_take_the_mean_of_their_neighbours(self):
        values = np.arange(9.0).reshape(3, 3)
        mask = np.zeros((3, 3), dtype=bool)
        mask[1, 1] = True

        filled = fill_masked(values, mask)

        self.assertAlmostEqual(filled[1, 1], 4.0)
        self.assertEqual(filled[0, 2], 2.0)


class TestDilatationField(SimpleTestCase):
    def setUp(self):
        axis = np.linspace(0.2, 0.8, 7)
        self.field = DilatationField.from_deformation(
            conjugate_quadratic(0.1), axis, axis
        )

    def test_exact_field_matches_the_catalog(self):
        np.testing.assert_allclose(self.field.mu, 0.2 * np.conj(self.field.points))
        self.assertEqual(self.field.masked_fraction, 0.0)

    def test_interpolation_is_exact_for_linear_mu(self):
        self.assertAlmostEqual(
            complex(self.field.interpolate_mu(0.45 + 0.38j)), 0.2 * (0.45 - 0.38j)
        )

    def test_interpolation_clamps_beyond_the_rectangle(self):
        self.assertAlmostEqual(
            complex(self.field.interpolate_mu(0.95 + 0.5j)), 0.2 * (0.8 - 0.5j)
        )

    def test_eccentricity_of_the_stretch(self):
        field = DilatationField.from_deformation(
            create_stretch(), np.array([0.4, 0.6]), np.array([0.5])
        )

        np.testing.assert_allclose(field.eccentricity(), 2.0)

    def test_shifted_tau(self):
        shifted = self.field.shifted_tau(0.5)

        np.testing.assert_allclose(shifted.tau, self.field.tau + 0.5)
        np.testing.assert_array_equal(shifted.mu, self.field.mu)


class TestDilatationEstimate(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kernel = Kernel.factory("triweight")
        cls.region = (0.4, 0.4, 0.6, 0.6)
        spec = GridSpec(64)
        cls.isotropic = sample_exact(create_model(), identity(), spec, seed=21)
        cls.stretched = sample_exact(create_model(), create_stretch(), spec, seed=22)

    def test_isotropic_field_has_small_dilatation(self):
        field = estimate_dilatation_field(
            self.isotropic, self.region, 0.38, self.kernel, 1.0
        )

        self.assertLess(np.median(np.abs(field.mu)), 0.3)
        self.assertEqual(field.n, 64)
        self.assertAlmostEqual(field.xs[0], 26 / 64)

    def test_stretched_field_recovers_the_stretch(self):
        field = estimate_dilatation_field(
            self.stretched, self.region, 0.38, self.kernel, 1.0
        )

        self.assertLess(np.median(np.abs(field.mu - 1 / 3)), 0.3)
        self.assertLess(np.median(np.abs(field.tau - math.log(1.5))), 0.3)

    def test_derivative_estimate_matches_finite_differences_of_mu(self):
        field = estimate_dilatation_field(
            self.stretched, self.region, 0.38, self.kernel, 1.0, with_derivative=True
        )
        spacing = 1 / 64

        central = (field.mu[:, 2:] - field.mu[:, :-2]) / (2 * spacing)

        scale = np.max(np.abs(central))
        np.testing.assert_allclose(
            field.dmu["x"][:, 1:-1], central, atol=0.05 * scale
        )

    def test_directional_derivative_combines_both_axes(self):
        u = (0.6, 0.8)
        field = estimate_dilatation_field(
            self.stretched, self.region, 0.38, self.kernel, 1.0, with_derivative=True
        )

        dmu = estimate_dmu(self.stretched, self.region, 0.38, self.kernel, 1.0, u)

        np.testing.assert_allclose(dmu, 0.6 * field.dmu["x"] + 0.8 * field.dmu["y"])

    def test_derivative_needs_a_compact_kernel(self):
        with self.assertRaises(VariationDomainError):
            estimate_dmu(
                self.stretched,
                self.region,
                0.38,
                Kernel.factory("gaussian"),
                1.0,
                (1, 0),
            )
