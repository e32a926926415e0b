"""
Isotropic covariance models R(t) for the undeformed field Z.

Two families are shipped, both with a fractional local expansion
R(0) - R(t) = sigma_c * t**alpha + o(t**(alpha + gamma)):

* powered-exponential  R(t) = v * exp(-c * (s*t)**alpha), alpha in (0, 2)
* Matern               R(t) = v * 2**(1-nu)/Gamma(nu) * x**nu * K_nu(x),
                       x = s*t/rho, nu in (0, 1), alpha = 2*nu

``s`` is an internal distance scale; ``normalized()`` picks it so that the
principal coefficient sigma_c is exactly one.
"""
import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy import special

from dif_estimator import constants
from dif_estimator.constants import CovarianceKind
from dif_estimator.exceptions import (
    CovarianceDomainError,
    NumericalDifferentiationError,
    UnsupportedCovariance,
)

logger = logging.getLogger(__name__)


class LocalExpansion(NamedTuple):
    alpha: float
    gamma: float
    sigma_c: float


class R3BoundReport(NamedTuple):
    fitted_c: float
    violation_ratio: float
    violated: bool
    t_min: float
    t_max: float
    method: str


@dataclass(frozen=True)
class CovarianceModel:
    kind: CovarianceKind
    scale: float = 1.0
    exponent: float = 1.0
    smoothness: float = 0.5
    correlation_range: float = 1.0
    variance: float = 1.0
    distance_scale: float = 1.0
    raw_sigma_c: Optional[float] = None

    def __post_init__(self):
        if self.variance <= 0 or self.distance_scale <= 0:
            raise UnsupportedCovariance(
                "variance and distance scale must be positive"
            )
        if self.kind is CovarianceKind.POWERED_EXPONENTIAL:
            if self.scale <= 0:
                raise UnsupportedCovariance(f"scale c={self.scale} must be > 0")
            if not 0 < self.exponent < 2:
                raise UnsupportedCovariance(
                    f"exponent alpha={self.exponent} outside (0, 2)"
                )
        elif self.kind is CovarianceKind.MATERN:
            if not 0 < self.smoothness < 1:
                raise UnsupportedCovariance(
                    f"Matern smoothness nu={self.smoothness} outside (0, 1); "
                    f"nu >= 1 gives alpha >= 2"
                )
            if self.correlation_range <= 0:
                raise UnsupportedCovariance(
                    f"range rho={self.correlation_range} must be > 0"
                )
        else:
            raise UnsupportedCovariance(f"unknown covariance kind {self.kind}")

    @property
    def alpha(self):
        if self.kind is CovarianceKind.MATERN:
            return 2.0 * self.smoothness
        return self.exponent

    @property
    def gamma(self):
        if self.kind is CovarianceKind.POWERED_EXPONENTIAL:
            # remainder is O(t**(2*alpha))
            return max(
                self.alpha - constants.GAMMA_OFFSET,
                constants.GAMMA_FRACTION * self.alpha,
            )
        # remainder is O(t**2)
        room = 2.0 - self.alpha
        if room > 2 * constants.GAMMA_OFFSET:
            return room - constants.GAMMA_OFFSET
        return constants.GAMMA_FRACTION * room

    @property
    def sigma_c(self):
        alpha = self.alpha
        if self.kind is CovarianceKind.POWERED_EXPONENTIAL:
            return self.variance * self.scale * self.distance_scale ** alpha
        nu = self.smoothness
        return (
            self.variance
            * special.gamma(1.0 - nu)
            / (special.gamma(1.0 + nu) * 4.0 ** nu)
            * (self.distance_scale / self.correlation_range) ** alpha
        )

    def local_expansion(self):
        return LocalExpansion(self.alpha, self.gamma, self.sigma_c)

    def normalized(self):
        """Same model with distances rescaled so that sigma_c == 1."""
        raw = self.sigma_c if self.raw_sigma_c is None else self.raw_sigma_c
        factor = self.sigma_c ** (-1.0 / self.alpha)
        return replace(
            self,
            distance_scale=self.distance_scale * factor,
            raw_sigma_c=raw,
        )

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(np.isnan(t)):
            raise CovarianceDomainError("covariance lag must be >= 0")
        st = self.distance_scale * t
        if self.kind is CovarianceKind.POWERED_EXPONENTIAL:
            return self.variance * np.exp(-self.scale * st ** self.exponent)
        nu = self.smoothness
        x = st / self.correlation_range
        values = np.full(x.shape, self.variance, dtype=float)
        positive = x > 0
        xp = x[positive]
        with np.errstate(under="ignore"):
            values[positive] = (
                self.variance
                * 2.0 ** (1.0 - nu)
                / special.gamma(nu)
                * xp ** nu
                * special.kv(nu, xp)
            )
        return values

    def __call__(self, t):
        return self.evaluate(t)

    def fourth_derivative(self, t):
        """Closed-form R''''(t) for t > 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise CovarianceDomainError(
                "fourth derivative is only defined away from the origin"
            )
        if self.kind is CovarianceKind.POWERED_EXPONENTIAL:
            a = self.exponent
            k = self.scale * self.distance_scale ** a
            u = k * t ** a
            u1 = k * a * t ** (a - 1)
            u2 = k * a * (a - 1) * t ** (a - 2)
            u3 = k * a * (a - 1) * (a - 2) * t ** (a - 3)
            u4 = k * a * (a - 1) * (a - 2) * (a - 3) * t ** (a - 4)
            bell = -u4 + 4 * u1 * u3 + 3 * u2 ** 2 - 6 * u1 ** 2 * u2 + u1 ** 4
            return self.variance * np.exp(-u) * bell
        nu = self.smoothness
        rate = self.distance_scale / self.correlation_range
        x = rate * t

        def psi(order):
            return x ** order * special.kv(abs(order), x)

        with np.errstate(under="ignore"):
            d4 = (
                3 * psi(nu - 2)
                - 6 * x ** 2 * psi(nu - 3)
                + x ** 4 * psi(nu - 4)
            )
        prefactor = self.variance * 2.0 ** (1.0 - nu) / special.gamma(nu)
        return prefactor * rate ** 4 * d4

    def to_dict(self):
        data = {"kind": self.kind.value, "variance": self.variance}
        if self.kind is CovarianceKind.POWERED_EXPONENTIAL:
            data.update(scale=self.scale, alpha=self.exponent)
        else:
            data.update(nu=self.smoothness, range=self.correlation_range)
        data["distance_scale"] = self.distance_scale
        if self.raw_sigma_c is not None:
            data["raw_sigma_c"] = self.raw_sigma_c
        return data


def powered_exponential(scale=1.0, alpha=1.0, variance=1.0):
    return CovarianceModel(
        CovarianceKind.POWERED_EXPONENTIAL,
        scale=scale,
        exponent=alpha,
        variance=variance,
    )


def matern(nu, correlation_range=1.0, variance=1.0):
    return CovarianceModel(
        CovarianceKind.MATERN,
        smoothness=nu,
        correlation_range=correlation_range,
        variance=variance,
    )


def make_covariance(spec):
    """
    Builds a model from a config/provenance mapping.

    Recognized keys: ``kind``, ``scale``, ``alpha`` (powered-exponential),
    ``nu``, ``range`` (Matern), ``variance``, ``normalize`` (default True)
    and ``distance_scale`` (provenance round trip).
    """
    spec = dict(spec)
    try:
        kind = CovarianceKind(spec.pop("kind", "powered-exponential"))
    except ValueError as e:
        raise UnsupportedCovariance(str(e)) from e
    normalize = spec.pop("normalize", True)
    distance_scale = spec.pop("distance_scale", None)
    raw_sigma_c = spec.pop("raw_sigma_c", None)
    variance = spec.pop("variance", 1.0)
    if kind is CovarianceKind.POWERED_EXPONENTIAL:
        model = powered_exponential(
            scale=spec.pop("scale", 1.0),
            alpha=spec.pop("alpha", 1.0),
            variance=variance,
        )
    else:
        model = matern(
            nu=spec.pop("nu", 0.5),
            correlation_range=spec.pop("range", 1.0),
            variance=variance,
        )
    if spec:
        raise UnsupportedCovariance(
            f"unknown covariance keys: {', '.join(sorted(spec))}"
        )
    if distance_scale is not None:
        return replace(
            model, distance_scale=distance_scale, raw_sigma_c=raw_sigma_c
        )
    if normalize:
        model = model.normalized()
        logger.debug(
            f"Normalized {kind.value} model, raw sigma_c={model.raw_sigma_c}"
        )
    return model


def eval_covariance(model, t):
    return model.evaluate(t)


def local_expansion(model):
    return model.local_expansion()


def fourth_derivative_numeric(
    model, t, relative_step=constants.RICHARDSON_RELATIVE_STEP
):
    """
    Richardson-extrapolated fourth central difference of R at ``t``.

    :raises NumericalDifferentiationError: when the step underflows or the
        difference is lost in roundoff.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    h = relative_step * t
    if np.any(t - 2 * h <= 0) or np.any(h <= np.finfo(float).tiny ** 0.25):
        raise NumericalDifferentiationError(
            f"fourth-difference step underflows at t={t.min():.3g}"
        )

    def fourth_difference(step):
        stencil = (
            model.evaluate(t - 2 * step)
            - 4 * model.evaluate(t - step)
            + 6 * model.evaluate(t)
            - 4 * model.evaluate(t + step)
            + model.evaluate(t + 2 * step)
        )
        return stencil, stencil / step ** 4

    raw_coarse, coarse = fourth_difference(h)
    _, fine = fourth_difference(h / 2)
    roundoff = 16 * np.finfo(float).eps * model.variance
    if np.any(np.abs(raw_coarse) < 10 * roundoff):
        worst = t[np.argmin(np.abs(raw_coarse))]
        raise NumericalDifferentiationError(
            f"fourth difference below roundoff at t={worst:.3g}"
        )
    return (4 * fine - coarse) / 3


def check_r3_bound(
    model, t_min, t_max, points=constants.R3_GRID_POINTS, numeric=False
):
    """
    Fits the constant of |R''''(t)| <= c * t**(alpha - 4) on a log grid.

    The violation ratio compares q(t) = |R''''(t)| * t**(4 - alpha) over
    the lowest decade of the grid with its value at the top of that
    decade; a bound that holds near the origin keeps the ratio near one.

    :param numeric: use Richardson differences instead of the closed form
    :return: R3BoundReport
    """
    if not 0 < t_min < t_max:
        raise CovarianceDomainError(
            f"need 0 < t_min < t_max, got [{t_min}, {t_max}]"
        )
    t = np.geomspace(t_min, t_max, points)
    if numeric:
        d4 = fourth_derivative_numeric(model, t)
    else:
        d4 = model.fourth_derivative(t)
    q = np.abs(d4) * t ** (4.0 - model.alpha)
    fitted_c = float(q.max())
    decade = t <= min(10 * t_min, t_max)
    reference = q[decade][-1]
    ratio = float(q[decade].max() / max(reference, np.finfo(float).tiny))
    violated = ratio > constants.R3_VIOLATION_SLACK
    if violated:
        logger.warning(
            f"R3 bound grows towards the origin for {model.kind.value}: "
            f"ratio {ratio:.3f}"
        )
    return R3BoundReport(
        fitted_c=fitted_c,
        violation_ratio=ratio,
        violated=violated,
        t_min=t_min,
        t_max=t_max,
        method="numeric" if numeric else "closed-form",
    )
