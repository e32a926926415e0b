import numpy as np
from django.test import SimpleTestCase

from dif_estimator.exceptions import GridError, OutOfGrid
from dif_estimator.grid import GridSpec, make_grid
from dif_estimator.tests.utils import create_sample


class TestGrid(SimpleTestCase):
    def test_open_domain_excludes_the_boundary(self):
        spec = GridSpec(4, margin=0)

        np.testing.assert_allclose(spec.xs, [0.25, 0.5, 0.75])
        np.testing.assert_allclose(spec.ys, [0.25, 0.5, 0.75])
        self.assertEqual(len(make_grid(spec)), 9)

    def test_margin_adds_layers_on_the_positive_sides(self):
        spec = GridSpec(4, margin=2)

        np.testing.assert_allclose(spec.xs, [0.25, 0.5, 0.75, 1.0, 1.25, 1.5])
        self.assertEqual(spec.interior_shape, (3, 3))
        self.assertEqual(spec.shape, (6, 6))

    def test_points_are_row_major_with_x_inner(self):
        points = make_grid(GridSpec(4, margin=0))

        self.assertEqual(points[1], 0.5 + 0.25j)
        self.assertEqual(points[3], 0.25 + 0.5j)

    def test_rectangular_domain(self):
        spec = GridSpec(10, domain=(0.2, 0.0, 0.6, 1.0), margin=0)

        np.testing.assert_allclose(spec.xs, [0.3, 0.4, 0.5])
        self.assertEqual(spec.shape, (9, 3))

    def test_zero_density_is_rejected(self):
        with self.assertRaises(GridError):
            GridSpec(0)

    def test_empty_domain_is_rejected(self):
        with self.assertRaises(GridError):
            GridSpec(8, domain=(0.5, 0.0, 0.5, 1.0))

    def test_negative_margin_is_rejected(self):
        with self.assertRaises(GridError):
            GridSpec(8, margin=-1)

    def test_sample_shape_must_match_grid(self):
        with self.assertRaises(GridError):
            create_sample(n=8, values=np.zeros((3, 3)))

    def test_sample_values_are_read_only(self):
        sample = create_sample(n=8)

        with self.assertRaises(ValueError):
            sample.values[0, 0] = 1.0

    def test_value_lookup_by_coordinate(self):
        sample = create_sample(n=8, values=lambda p: p.real + 10 * p.imag)

        self.assertAlmostEqual(sample.value_at(0.25, 0.5), 5.25)

    def test_value_lookup_off_the_lattice_fails(self):
        sample = create_sample(n=8)

        with self.assertRaises(OutOfGrid):
            sample.value_at(0.3, 0.5)
        with self.assertRaises(OutOfGrid):
            sample.value_at(0.0, 0.5)
