"""
Bergman projection on the unit disk.

With the orthonormal basis e_k(z) = sqrt((k+1)/pi) z^k of the Bergman
space, the projection of a real function u is

    P u(w) = 2 * sum_k <u, e_k> e_k(w) - u(0)
           = sum_k c_k w^k,   c_k = 2(k+1)/pi * int u(z) conj(z)^k dA - [k=0] u(0),

so P(Re F) = F - i Im F(0) for holomorphic F.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as npoly

from dif_estimator import constants
from dif_estimator.exceptions import BergmanInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DiskQuadrature:
    """Gauss-Legendre in the radius times the uniform rule in the angle."""

    radial_count: int = constants.QUADRATURE_RADIAL
    angular_count: int = constants.QUADRATURE_ANGULAR
    radii: np.ndarray = field(init=False)
    angles: np.ndarray = field(init=False)
    nodes: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)

    def __post_init__(self):
        x, w = legendre.leggauss(self.radial_count)
        radii = (x + 1) / 2
        radial_weights = w / 2
        angles = 2 * np.pi * np.arange(self.angular_count) / self.angular_count
        nodes = radii[:, np.newaxis] * np.exp(1j * angles[np.newaxis, :])
        weights = np.repeat(
            (radii * radial_weights * 2 * np.pi / self.angular_count)[:, np.newaxis],
            self.angular_count,
            axis=1,
        )
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "nodes", nodes.ravel())
        object.__setattr__(self, "weights", weights.ravel())

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values))


@dataclass(frozen=True, eq=False)
class HolomorphicPoly:
    """sum_k coefficients[k] * ((w - center) / scale)^k"""

    coefficients: np.ndarray
    center: complex = 0j
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.array(self.coefficients, dtype=complex)
        )

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, w):
        zeta = (np.asarray(w, dtype=complex) - self.center) / self.scale
        return npoly.polyval(zeta, self.coefficients)

    def derivative(self):
        return HolomorphicPoly(
            npoly.polyder(self.coefficients) / self.scale, self.center, self.scale
        )

    def antiderivative(self):
        """The primitive vanishing at ``center``."""
        return HolomorphicPoly(
            npoly.polyint(self.coefficients) * self.scale, self.center, self.scale
        )

    def padded(self, degree):
        out = np.zeros(degree + 1, dtype=complex)
        out[: min(degree, self.degree) + 1] = self.coefficients[: degree + 1]
        return out


def bergman_project(u, degree, quad, origin_value=None):
    """
    Degree-``degree`` projection P u.

    :param u: callable on complex points, or its values at ``quad.nodes``
    :param origin_value: u(0); required when ``u`` is given as values
    """
    if callable(u):
        values = np.asarray(u(quad.nodes), dtype=float)
        origin_value = float(np.real(u(np.array([0j]))[0]))
    else:
        values = np.asarray(u, dtype=float)
        if origin_value is None:
            raise BergmanInputError("u(0) is required with sampled values")
    if values.shape != quad.nodes.shape:
        raise BergmanInputError(
            f"{values.shape} values for {quad.nodes.shape} quadrature nodes"
        )
    if not (np.all(np.isfinite(values)) and np.isfinite(origin_value)):
        raise BergmanInputError("non-finite values at quadrature nodes")
    k = np.arange(degree + 1)
    moments = (quad.weights * values) @ (np.conj(quad.nodes)[:, np.newaxis] ** k)
    coefficients = 2 * (k + 1) / np.pi * moments
    coefficients[0] -= origin_value
    return HolomorphicPoly(coefficients)


def projection_residual(poly, values, nodes):
    """sup |Re(P u) - u| over the given nodes."""
    return float(np.max(np.abs(np.real(poly(nodes)) - values)))


def project_real_part_identity_check(F, quad, degree=None):
    """
    Max coefficient deviation of P(Re F) from F - i Im F(0).
    """
    degree = F.degree if degree is None else degree
    projected = bergman_project(lambda z: np.real(F(z)), degree, quad)
    expected = F.padded(degree)
    expected[0] -= 1j * np.imag(F(0j))
    return float(np.max(np.abs(projected.padded(degree) - expected)))


def integrate_exp_along_segment(p, w, nodes=constants.SEGMENT_NODES):
    """
    int_0^w exp(p(s)) ds along the straight segment, by Gauss-Legendre.
    Vectorized over ``w``.
    """
    w = np.asarray(w, dtype=complex)
    x, weights = legendre.leggauss(nodes)
    t = (x + 1) / 2
    samples = np.exp(p(w[..., np.newaxis] * t))
    return w * np.sum(samples * (weights / 2), axis=-1)
