import numpy as np
from django.test import SimpleTestCase

from dif_estimator.bergman import (
    DiskQuadrature,
    HolomorphicPoly,
    bergman_project,
    integrate_exp_along_segment,
    project_real_part_identity_check,
    projection_residual,
)
from dif_estimator.exceptions import BergmanInputError


class TestDiskQuadrature(SimpleTestCase):
    def setUp(self):
        self.quad = DiskQuadrature(32, 64)

    def test_area_of_the_disk(self):
        self.assertAlmostEqual(self.quad.integrate(np.ones(self.quad.nodes.size)), np.pi)

    def test_second_moment(self):
        values = np.abs(self.quad.nodes) ** 2

        self.assertAlmostEqual(self.quad.integrate(values), np.pi / 2)

    def test_nodes_stay_inside_the_disk(self):
        self.assertLess(np.max(np.abs(self.quad.nodes)), 1)
        self.assertEqual(self.quad.nodes.shape, self.quad.weights.shape)


class TestHolomorphicPoly(SimpleTestCase):
    def test_evaluation_in_scaled_coordinates(self):
        p = HolomorphicPoly([1, 2, 3], center=0.5 + 0.5j, scale=0.5)

        self.assertAlmostEqual(complex(p(1.0 + 0.5j)), 1 + 2 + 3)

    def test_derivative_respects_the_scale(self):
        p = HolomorphicPoly([0, 0, 1], center=0.5, scale=0.5)

        # ((w - 0.5) / 0.5)^2 has derivative 8 (w - 0.5)
        self.assertAlmostEqual(complex(p.derivative()(0.75)), 2.0)

    def test_antiderivative_vanishes_at_the_center(self):
        p = HolomorphicPoly([1, 1j], center=0.2j, scale=2.0)
        primitive = p.antiderivative()

        self.assertEqual(complex(primitive(0.2j)), 0)
        w, step = 0.3 + 0.1j, 1e-6
        self.assertAlmostEqual(
            complex((primitive(w + step) - primitive(w - step)) / (2 * step)),
            complex(p(w)),
            places=8,
        )

    def test_padding(self):
        np.testing.assert_array_equal(HolomorphicPoly([1, 2]).padded(3), [1, 2, 0, 0])
        np.testing.assert_array_equal(HolomorphicPoly([1, 2, 3]).padded(1), [1, 2])


class TestBergmanProjection(SimpleTestCase):
    def setUp(self):
        self.quad = DiskQuadrature(32, 128)

    def test_real_part_of_a_polynomial_is_recovered(self):
        F = HolomorphicPoly([0.3 + 0.7j, 1 - 2j, 0.5j, -0.25])

        self.assertLess(project_real_part_identity_check(F, self.quad, degree=8), 1e-10)

    def test_projection_of_a_constant(self):
        projected = bergman_project(lambda z: np.full(z.shape, 2.5), 4, self.quad)

        np.testing.assert_allclose(projected.coefficients, [2.5, 0, 0, 0, 0], atol=1e-12)

    def test_sampled_values_need_the_origin_value(self):
        values = np.real(self.quad.nodes)

        with self.assertRaises(BergmanInputError):
            bergman_project(values, 4, self.quad)

    def test_sampled_values_match_callable_input(self):
        u = lambda z: np.real(z ** 2) + np.imag(z)  # noqa: E731

        from_values = bergman_project(u(self.quad.nodes), 6, self.quad, origin_value=0.0)
        from_callable = bergman_project(u, 6, self.quad)

        np.testing.assert_allclose(
            from_values.coefficients, from_callable.coefficients, atol=1e-14
        )
        self.assertLess(
            projection_residual(from_values, u(self.quad.nodes), self.quad.nodes),
            1e-10,
        )

    def test_shape_mismatch_is_rejected(self):
        with self.assertRaises(BergmanInputError):
            bergman_project(np.zeros(5), 4, self.quad, origin_value=0.0)

    def test_non_finite_values_are_rejected(self):
        values = np.zeros(self.quad.nodes.size)
        values[3] = np.nan

        with self.assertRaises(BergmanInputError):
            bergman_project(values, 4, self.quad, origin_value=0.0)


class TestSegmentIntegral(SimpleTestCase):
    def test_exponential_of_zero_integrates_to_the_endpoint(self):
        w = np.array([0.3 + 0.4j, -0.5j])

        np.testing.assert_allclose(
            integrate_exp_along_segment(HolomorphicPoly([0]), w), w, atol=1e-14
        )

    def test_exponential_of_the_identity(self):
        w = 0.4 - 0.3j

        value = integrate_exp_along_segment(HolomorphicPoly([0, 1]), w)

        self.assertAlmostEqual(complex(value), np.exp(w) - 1, places=12)
