import math

import numpy as np
from django.test import SimpleTestCase

from dif_estimator.constants import CovarianceKind
from dif_estimator.covariance import (
    check_r3_bound,
    eval_covariance,
    fourth_derivative_numeric,
    local_expansion,
    make_covariance,
    matern,
    powered_exponential,
)
from dif_estimator.exceptions import (
    CovarianceDomainError,
    NumericalDifferentiationError,
    UnsupportedCovariance,
)
from dif_estimator.tests.utils import create_model


class TestCovariance(SimpleTestCase):
    def setUp(self):
        self.model = create_model()

    def test_powered_exponential_is_one_at_the_origin(self):
        self.assertEqual(eval_covariance(self.model, 0.0), 1.0)

    def test_powered_exponential_at_unit_lag(self):
        self.assertAlmostEqual(
            float(eval_covariance(self.model, 1.0)), math.exp(-1), places=12
        )

    def test_matern_one_half_is_exponential(self):
        model = matern(0.5, correlation_range=2.0)
        t = np.array([0.0, 0.1, 0.5, 1.0, 3.0])

        np.testing.assert_allclose(model.evaluate(t), np.exp(-t / 2), rtol=1e-12)

    def test_negative_lag_is_rejected(self):
        with self.assertRaises(CovarianceDomainError):
            self.model.evaluate(-0.1)

    def test_local_expansion_of_exponential(self):
        alpha, gamma, sigma_c = local_expansion(self.model)

        self.assertEqual(alpha, 1.0)
        self.assertAlmostEqual(gamma, 0.9)
        self.assertAlmostEqual(sigma_c, 1.0)

    def test_local_expansion_ships_gamma_below_alpha(self):
        expansion = create_model(alpha=1.5).local_expansion()

        self.assertEqual(expansion.alpha, 1.5)
        self.assertAlmostEqual(expansion.gamma, 1.4)

    def test_matern_alpha_is_twice_the_smoothness(self):
        self.assertAlmostEqual(matern(0.25).alpha, 0.5)

    def test_normalization_makes_the_principal_coefficient_one(self):
        for model in (
            powered_exponential(scale=3.0, alpha=0.7),
            matern(0.3, correlation_range=0.4),
        ):
            normalized = model.normalized()
            self.assertAlmostEqual(normalized.sigma_c, 1.0, places=12)
            self.assertAlmostEqual(normalized.raw_sigma_c, model.sigma_c)

    def test_normalized_model_follows_its_local_expansion(self):
        model = matern(0.25).normalized()
        t = np.geomspace(1e-6, 1e-4, 5)

        decrement = model.evaluate(0.0) - model.evaluate(t)

        np.testing.assert_allclose(decrement / t ** model.alpha, 1.0, rtol=0.05)

    def test_alpha_outside_open_interval_is_rejected(self):
        for alpha in (0.0, 2.0, 2.5):
            with self.assertRaises(UnsupportedCovariance):
                powered_exponential(alpha=alpha)

    def test_matern_smoothness_of_one_is_rejected(self):
        with self.assertRaises(UnsupportedCovariance):
            matern(1.0)

    def test_make_covariance_rejects_unknown_kind(self):
        with self.assertRaises(UnsupportedCovariance):
            make_covariance({"kind": "spherical"})

    def test_make_covariance_rejects_unknown_keys(self):
        with self.assertRaises(UnsupportedCovariance):
            make_covariance({"kind": "matern", "nu": 0.5, "smoothness": 3})

    def test_make_covariance_normalizes_by_default(self):
        model = make_covariance({"kind": "powered-exponential", "scale": 4.0})

        self.assertIs(model.kind, CovarianceKind.POWERED_EXPONENTIAL)
        self.assertAlmostEqual(model.sigma_c, 1.0)

    def test_provenance_round_trip_keeps_distance_scale(self):
        model = matern(0.4, correlation_range=0.5).normalized()

        rebuilt = make_covariance(model.to_dict())

        self.assertEqual(rebuilt.distance_scale, model.distance_scale)
        self.assertEqual(rebuilt.raw_sigma_c, model.raw_sigma_c)
        self.assertEqual(rebuilt.evaluate(0.3), model.evaluate(0.3))

    def test_closed_form_fourth_derivative_of_exponential(self):
        t = np.array([0.2, 0.5, 1.0])

        np.testing.assert_allclose(
            self.model.fourth_derivative(t), np.exp(-t), rtol=1e-12
        )

    def test_closed_form_fourth_derivative_matches_richardson(self):
        t = np.array([0.3, 0.5, 0.8])
        for model in (create_model(alpha=1.5), matern(0.25).normalized()):
            np.testing.assert_allclose(
                model.fourth_derivative(t),
                fourth_derivative_numeric(model, t),
                rtol=1e-3,
            )

    def test_fourth_derivative_at_origin_is_rejected(self):
        with self.assertRaises(CovarianceDomainError):
            self.model.fourth_derivative(0.0)

    def test_richardson_difference_refuses_roundoff_sized_steps(self):
        with self.assertRaises(NumericalDifferentiationError):
            fourth_derivative_numeric(self.model, 1e-6)

    def test_r3_bound_holds_for_exponential(self):
        report = check_r3_bound(self.model, 1e-4, 1.0)

        self.assertFalse(report.violated)
        self.assertTrue(np.isfinite(report.fitted_c))
        self.assertEqual(report.method, "closed-form")

    def test_r3_bound_holds_near_the_smooth_end(self):
        report = check_r3_bound(create_model(alpha=1.9), 1e-4, 1.0)

        self.assertFalse(report.violated)

    def test_r3_bound_rejects_a_degenerate_range(self):
        with self.assertRaises(CovarianceDomainError):
            check_r3_bound(self.model, 0.5, 0.5)
