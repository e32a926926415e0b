import abc

import numpy as np

from dif_estimator import constants
from dif_estimator.constants import KernelKind, Smoothness


class Kernel(abc.ABC):
    """
    A bivariate smoothing kernel with unit mass.

    ``truncation_radius`` bounds the square window (sup-norm) over which
    sums are taken; it equals the support radius for compact kernels.
    """

    kind = None
    support_radius = None
    truncation_radius = None
    smoothness = None

    @abc.abstractmethod
    def evaluate(self, x, y):
        pass

    @abc.abstractmethod
    def gradient(self, x, y):
        """(dK/dx, dK/dy)"""
        pass

    @property
    def compact(self):
        return np.isfinite(self.support_radius)

    @staticmethod
    def factory(kind):
        kind = KernelKind(kind)
        if kind is KernelKind.GAUSSIAN:
            return GaussianKernel()
        return TriweightKernel()


class TriweightKernel(Kernel):
    """Product kernel k(x)k(y), k(u) = 35/32 (1 - u^2)^3 on [-1, 1]."""

    kind = KernelKind.TRIWEIGHT
    support_radius = 1.0
    truncation_radius = 1.0
    smoothness = Smoothness.C2

    @staticmethod
    def profile(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) < 1, 35.0 / 32.0 * (1 - u ** 2) ** 3, 0.0)

    @staticmethod
    def profile_derivative(u):
        u = np.asarray(u, dtype=float)
        return np.where(
            np.abs(u) < 1, -105.0 / 16.0 * u * (1 - u ** 2) ** 2, 0.0
        )

    def evaluate(self, x, y):
        return self.profile(x) * self.profile(y)

    def gradient(self, x, y):
        return (
            self.profile_derivative(x) * self.profile(y),
            self.profile(x) * self.profile_derivative(y),
        )


class GaussianKernel(Kernel):
    kind = KernelKind.GAUSSIAN
    support_radius = np.inf
    truncation_radius = constants.GAUSSIAN_EFFECTIVE_RADIUS
    smoothness = Smoothness.SMOOTH

    def evaluate(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return np.exp(-(x ** 2 + y ** 2) / 2) / (2 * np.pi)

    def gradient(self, x, y):
        value = self.evaluate(x, y)
        return -np.asarray(x) * value, -np.asarray(y) * value
