import numpy as np
from django.test import SimpleTestCase

from dif_estimator.selfcheck import (
    CheckSelector,
    check_covariance_remainder,
    check_ellipse_round_trip,
    random_jacobians,
    run_selfcheck,
)


class TestSelfcheck(SimpleTestCase):
    def test_random_jacobians_preserve_orientation(self):
        J = random_jacobians(500)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]

        self.assertEqual(J.shape, (500, 2, 2))
        self.assertGreater(det.min(), 0)
        self.assertLessEqual(np.abs(J).max(), 3)

    def test_random_jacobians_are_reproducible(self):
        np.testing.assert_array_equal(random_jacobians(50), random_jacobians(50))

    def test_ellipse_round_trip_check(self):
        passed, detail = check_ellipse_round_trip()

        self.assertTrue(passed, detail)

    def test_covariance_remainder_check(self):
        passed, detail = check_covariance_remainder()

        self.assertTrue(passed, detail)

    def test_numerical_checks_pass(self):
        names = [
            "bergman_monomials",
            "bergman_identity",
            "beurling_convention",
            "riemann_disk",
            "alignment",
        ]

        results = run_selfcheck(names)

        self.assertEqual([result.name for result in results], names)
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")

    def test_failing_check_is_reported_not_raised(self):
        [result] = run_selfcheck(["no_such_check"])

        self.assertFalse(result.passed)
        self.assertTrue(result.detail.startswith("KeyError"))

    def test_every_check_is_registered(self):
        self.assertEqual(len(CheckSelector), 9)
