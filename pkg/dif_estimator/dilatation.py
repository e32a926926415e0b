"""
From directional variations to the complex dilatation and log-scale.

With W_h = (B(h) / (8 - 2^(alpha+1)))^(1/alpha) ~ |J h| for
h = 1, i, 1 + i, the quadratic form |J h|^2 is the ellipse
a x^2 + b x y + c y^2 with a = W1^2, c = W2^2, b = W3^2 - W1^2 - W2^2, and

    D = sqrt(4ac - b^2) + a + c = 4 |df|^2,
    mu = (a - c + i b) / D,
    tau = (log D - log 4) / 2.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from dif_estimator import constants
from dif_estimator.exceptions import (
    DegenerateEllipse,
    DegenerateField,
    VariationDomainError,
)
from dif_estimator.qvar import smoothed_variation_field, variation_constant

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EllipseCoefficients:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    # 4ac - b^2, kept in factored form when built from the W's
    discriminant: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.discriminant is None:
            object.__setattr__(
                self, "discriminant", 4 * self.a * self.c - self.b ** 2
            )

    @property
    def valid(self):
        return (self.a > 0) & (self.c > 0) & (self.discriminant > 0)


@dataclass(frozen=True, eq=False)
class DilatationField:
    xs: np.ndarray
    ys: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    mask: np.ndarray
    n: Optional[int] = None
    b: Optional[float] = None
    kernel: Optional[str] = None
    alpha: Optional[float] = None
    # "x" / "y" -> directional derivative of mu along that axis
    dmu: dict = field(default_factory=dict)
    source: str = "estimated"

    @property
    def points(self):
        return self.xs[np.newaxis, :] + 1j * self.ys[:, np.newaxis]

    @property
    def region(self):
        return (self.xs[0], self.ys[0], self.xs[-1], self.ys[-1])

    @property
    def masked_fraction(self):
        return float(np.mean(self.mask))

    def _interpolate(self, values, z):
        z = np.asarray(z, dtype=complex)
        x = np.clip(z.real, self.xs[0], self.xs[-1])
        y = np.clip(z.imag, self.ys[0], self.ys[-1])
        where = np.stack([y.ravel(), x.ravel()], axis=-1)
        interpolator = RegularGridInterpolator(
            (self.ys, self.xs), values, method="linear"
        )
        return interpolator(where).reshape(z.shape)

    def interpolate_mu(self, z):
        """Bilinear mu, nearest value beyond the field's rectangle."""
        return self._interpolate(self.mu.real, z) + 1j * self._interpolate(
            self.mu.imag, z
        )

    def interpolate_tau(self, z):
        return self._interpolate(self.tau, z)

    def complex_derivative(self):
        """d mu = (d_x mu - i d_y mu) / 2"""
        if "x" not in self.dmu or "y" not in self.dmu:
            return None
        return 0.5 * (self.dmu["x"] - 1j * self.dmu["y"])

    def eccentricity(self):
        """Axis ratio of the ellipse that f maps an infinitesimal circle to."""
        r = np.abs(self.mu)
        return (1 + r) / (1 - r)

    def inclination(self):
        return np.angle(-self.mu) / 2

    def shifted_tau(self, kappa):
        return DilatationField(
            xs=self.xs,
            ys=self.ys,
            mu=self.mu,
            tau=self.tau + kappa,
            mask=self.mask,
            n=self.n,
            b=self.b,
            kernel=self.kernel,
            alpha=self.alpha,
            dmu=self.dmu,
            source=self.source,
        )

    @classmethod
    def from_deformation(cls, deformation, xs, ys):
        """Exact catalog mu and tau on the lattice xs x ys."""
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        z = xs[np.newaxis, :] + 1j * ys[:, np.newaxis]
        return cls(
            xs=xs,
            ys=ys,
            mu=deformation.mu(z),
            tau=deformation.tau(z),
            mask=np.zeros(z.shape, dtype=bool),
            source="exact",
        )


def directional_scale(B, alpha):
    """W = (B / (8 - 2^(alpha+1)))^(1/alpha)"""
    B = np.asarray(B, dtype=float)
    if np.any(B < 0) or np.any(np.isnan(B)):
        raise VariationDomainError("variation values must be >= 0")
    if not 0 < alpha < 2:
        raise VariationDomainError(f"alpha={alpha} outside (0, 2)")
    return (B / variation_constant(alpha)) ** (1.0 / alpha)


def directional_scale_derivative(B, dB, alpha):
    """dW = W / (alpha B) * dB; NaN where B == 0."""
    B = np.asarray(B, dtype=float)
    W = directional_scale(B, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(B > 0, W / (alpha * B) * dB, np.nan)


def ellipse_coefficients(W1, W2, W3, strict=True):
    """
    Ellipse a x^2 + b x y + c y^2 = 1 through the three directional scales.

    :param strict: raise on any degenerate point instead of reporting it
        through ``EllipseCoefficients.valid``
    """
    W1, W2, W3 = (np.asarray(w, dtype=float) for w in (W1, W2, W3))
    a = W1 ** 2
    c = W2 ** 2
    b = W3 ** 2 - a - c
    discriminant = (W1 + W2 - W3) * (W1 + W2 + W3) * (W3 - W1 + W2) * (W3 + W1 - W2)
    ellipse = EllipseCoefficients(a=a, b=b, c=c, discriminant=discriminant)
    if strict and not np.all(ellipse.valid):
        raise DegenerateEllipse(
            "4ac - b^2 <= 0: variations too noisy for an ellipse, "
            "increase the bandwidth"
        )
    return ellipse


def mu_tau_from_ellipse(ellipse, clamp=constants.MU_CLAMP):
    """(mu, tau) with |mu| clamped to 1 - clamp; NaN at degenerate points."""
    valid = ellipse.valid
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(np.where(valid, ellipse.discriminant, np.nan))
        D = root + ellipse.a + ellipse.c
        mu = (ellipse.a - ellipse.c + 1j * ellipse.b) / D
        tau = (np.log(D) - np.log(4.0)) / 2
    modulus = np.abs(mu)
    limit = 1.0 - clamp
    over = modulus > limit
    if np.any(over):
        mu = np.where(over, mu * (limit / np.where(over, modulus, 1.0)), mu)
    return mu, tau


def mu_tau_from_variations(variations, alpha, clamp=constants.MU_CLAMP):
    """
    :param variations: mapping direction name -> B values for x, y, diagonal
    :return: (mu, tau, degenerate mask)
    """
    W = [directional_scale(variations[name], alpha) for name in constants.DIRECTIONS]
    ellipse = ellipse_coefficients(*W, strict=False)
    mu, tau = mu_tau_from_ellipse(ellipse, clamp)
    return mu, tau, ~ellipse.valid


def dmu_from_variations(variations, derivatives, alpha):
    """
    Directional derivative of mu by the chain rule through the ellipse
    algebra.

    :param variations: direction name -> B
    :param derivatives: direction name -> derivative of B along one fixed u
    """
    names = tuple(constants.DIRECTIONS)
    W = [directional_scale(variations[name], alpha) for name in names]
    dW = [
        directional_scale_derivative(variations[name], derivatives[name], alpha)
        for name in names
    ]
    ellipse = ellipse_coefficients(*W, strict=False)
    a, b, c = ellipse.a, ellipse.b, ellipse.c
    da = 2 * W[0] * dW[0]
    dc = 2 * W[1] * dW[1]
    db = 2 * W[2] * dW[2] - da - dc
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(np.where(ellipse.valid, ellipse.discriminant, np.nan))
        droot = (4 * (da * c + a * dc) - 2 * b * db) / (2 * root)
        D = root + a + c
        dD = droot + da + dc
        d_re = ((da - dc) * D - (a - c) * dD) / D ** 2
        d_im = (db * D - b * dD) / D ** 2
    return d_re + 1j * d_im


def fill_masked(values, mask):
    """
    Replaces masked entries by the mean of their valid 8-neighbours,
    sweeping inwards until every reachable entry is filled.
    """
    values = np.array(values)
    valid = ~np.asarray(mask, dtype=bool)
    footprint = np.ones((3, 3))
    complex_input = np.iscomplexobj(values)
    while not valid.all():
        counts = ndimage.convolve(valid.astype(float), footprint, mode="constant")
        ready = ~valid & (counts > 0)
        if not ready.any():
            break
        parts = [values.real, values.imag] if complex_input else [values]
        filled = []
        for part in parts:
            sums = ndimage.convolve(
                np.where(valid, part, 0.0), footprint, mode="constant"
            )
            filled.append(np.where(ready, sums / np.maximum(counts, 1), part))
        values = filled[0] + 1j * filled[1] if complex_input else filled[0]
        valid = valid | ready
    return values


def estimate_dilatation_field(
    Y,
    region,
    b,
    kernel,
    alpha,
    clamp=constants.MU_CLAMP,
    with_derivative=False,
):
    """
    mu and tau estimates on the evaluable grid points of ``region``.

    Degenerate ellipses are masked and filled from valid neighbours; more
    than 10% degenerate points fails the whole field.
    """
    variations = smoothed_variation_field(
        Y, b, kernel, alpha, region=region, with_derivative=with_derivative
    )
    mu, tau, mask = mu_tau_from_variations(variations.values, alpha, clamp)
    fraction = float(np.mean(mask))
    if fraction > constants.DEGENERATE_FRACTION_LIMIT:
        raise DegenerateField(
            f"{fraction:.1%} of the points have degenerate ellipses at "
            f"b={b:.4g}; increase the bandwidth"
        )
    dmu = {}
    if with_derivative:
        for axis, index in (("x", 0), ("y", 1)):
            along = {
                name: pair[index] for name, pair in variations.derivatives.items()
            }
            dmu[axis] = dmu_from_variations(variations.values, along, alpha)
    if mask.any():
        logger.warning(
            f"{int(mask.sum())} degenerate points ({fraction:.2%}) filled "
            f"from neighbours"
        )
        mu = fill_masked(mu, mask)
        tau = fill_masked(tau, mask)
        dmu = {axis: fill_masked(value, mask) for axis, value in dmu.items()}
    logger.info(
        f"Estimated dilatation on {mu.shape[0]}x{mu.shape[1]} points, "
        f"median |mu|={np.median(np.abs(mu)):.4f}"
    )
    return DilatationField(
        xs=variations.xs,
        ys=variations.ys,
        mu=mu,
        tau=tau,
        mask=mask,
        n=Y.n,
        b=b,
        kernel=kernel.kind.value,
        alpha=alpha,
        dmu=dmu,
    )


def estimate_dmu(Y, region, b, kernel, alpha, u):
    """d_u mu-hat on the field points for a unit direction u = (ux, uy)."""
    if not kernel.compact:
        raise VariationDomainError(
            "derivative estimation needs a compactly supported kernel"
        )
    estimate = estimate_dilatation_field(
        Y, region, b, kernel, alpha, with_derivative=True
    )
    ux, uy = u
    return ux * estimate.dmu["x"] + uy * estimate.dmu["y"]
