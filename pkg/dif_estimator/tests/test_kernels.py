import os
import tempfile

import numpy as np
from django.test import SimpleTestCase, override_settings

from dif_estimator.constants import KernelKind, Smoothness
from dif_estimator.kernels import GaussianKernel, Kernel, TriweightKernel
from dif_estimator.utils import (
    atomic_write,
    derive_seed,
    exact_sampler_cap,
    philox_generator,
)


class TestKernels(SimpleTestCase):
    def setUp(self):
        self.x, self.y = np.meshgrid(
            np.linspace(-7, 7, 701), np.linspace(-7, 7, 701), indexing="ij"
        )
        self.step = 14 / 700

    def test_factory_builds_each_kind(self):
        self.assertIsInstance(Kernel.factory("triweight"), TriweightKernel)
        self.assertIsInstance(Kernel.factory(KernelKind.GAUSSIAN), GaussianKernel)

    def test_kernels_have_unit_mass(self):
        for kernel in (TriweightKernel(), GaussianKernel()):
            mass = kernel.evaluate(self.x, self.y).sum() * self.step ** 2
            self.assertAlmostEqual(mass, 1.0, places=4)

    def test_triweight_vanishes_outside_its_support(self):
        kernel = TriweightKernel()

        self.assertEqual(kernel.evaluate(1.0, 0.0), 0.0)
        self.assertEqual(kernel.evaluate(0.3, -1.2), 0.0)
        self.assertTrue(kernel.compact)
        self.assertFalse(GaussianKernel().compact)
        self.assertEqual(kernel.smoothness, Smoothness.C2)

    def test_gradient_matches_finite_differences(self):
        h = 1e-6
        for kernel in (TriweightKernel(), GaussianKernel()):
            dx, dy = kernel.gradient(0.3, -0.4)
            self.assertAlmostEqual(
                dx,
                (kernel.evaluate(0.3 + h, -0.4) - kernel.evaluate(0.3 - h, -0.4))
                / (2 * h),
                places=6,
            )
            self.assertAlmostEqual(
                dy,
                (kernel.evaluate(0.3, -0.4 + h) - kernel.evaluate(0.3, -0.4 - h))
                / (2 * h),
                places=6,
            )


class TestSeeds(SimpleTestCase):
    def test_derived_seeds_are_stable_and_distinct(self):
        self.assertEqual(derive_seed(7, 64), derive_seed(7, 64))
        self.assertNotEqual(derive_seed(7, 64), derive_seed(7, 96))
        self.assertNotEqual(derive_seed(7, 64), derive_seed(8, 64))
        self.assertLess(derive_seed(7, 64), 2 ** 64)

    def test_philox_streams_repeat_for_a_seed(self):
        np.testing.assert_array_equal(
            philox_generator(11).standard_normal(5),
            philox_generator(11).standard_normal(5),
        )

    @override_settings(DIF_EXACT_SAMPLER_CAP=500)
    def test_sampler_cap_follows_the_settings(self):
        self.assertEqual(exact_sampler_cap(), 500)


class TestAtomicWrite(SimpleTestCase):
    def test_writes_the_file_and_leaves_no_temporary(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "nested", "out.txt")

            atomic_write(path, "a\nb\n")

            with open(path) as written:
                self.assertEqual(written.read(), "a\nb\n")
            self.assertEqual(os.listdir(os.path.dirname(path)), ["out.txt"])
