"""
Analytic test deformations f of the plane, written in complex form.

A deformation is fixed by its forward map and its two complex derivatives
d = (f_x - i f_y)/2 and dbar = (f_x + i f_y)/2; the Jacobian, dilatation
mu = dbar/d and log-scale tau = log|d| are derived from those, so all
fields stay mutually consistent.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from dif_estimator import constants
from dif_estimator.constants import DeformationKind, Smoothness
from dif_estimator.exceptions import DeformationError

logger = logging.getLogger(__name__)


class ValidityReport(NamedTuple):
    passed: bool
    min_det: float
    c1: float
    c2: float
    max_abs_mu: float
    min_margin: float
    worst_point: complex


@dataclass(frozen=True, eq=False)
class Deformation:
    name: str
    forward: Callable
    holomorphic_derivative: Callable
    antiholomorphic_derivative: Callable
    # every catalog map is polynomial
    smoothness: Smoothness = Smoothness.C3
    # Positive where the constructor's own validity condition holds.
    margin: Optional[Callable] = None
    parameters: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.forward(np.asarray(z, dtype=complex))

    def d(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(self.holomorphic_derivative(z), z.shape).astype(
            complex
        )

    def dbar(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(
            self.antiholomorphic_derivative(z), z.shape
        ).astype(complex)

    def jacobian(self, z):
        d, dbar = self.d(z), self.dbar(z)
        fx = d + dbar
        fy = 1j * (d - dbar)
        return np.stack(
            [
                np.stack([fx.real, fy.real], axis=-1),
                np.stack([fx.imag, fy.imag], axis=-1),
            ],
            axis=-2,
        )

    def mu(self, z):
        return self.dbar(z) / self.d(z)

    def tau(self, z):
        return np.log(np.abs(self.d(z)))

    def determinant(self, z):
        return np.abs(self.d(z)) ** 2 - np.abs(self.dbar(z)) ** 2

    def singular_values(self, z):
        """(smallest, largest) singular value of the Jacobian."""
        d, dbar = np.abs(self.d(z)), np.abs(self.dbar(z))
        return np.abs(d - dbar), d + dbar

    def stretch(self, z, h):
        """|J_f(z) h| for a direction h given as a complex number."""
        h = complex(h)
        return np.abs(self.d(z) * h + self.dbar(z) * np.conj(h))

    def to_dict(self):
        return {"kind": self.name, **self.parameters}


def _complex_parameter(value):
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def identity():
    return Deformation(
        name=DeformationKind.IDENTITY.value,
        forward=lambda z: z.copy(),
        holomorphic_derivative=lambda z: np.ones_like(z),
        antiholomorphic_derivative=lambda z: np.zeros_like(z),
    )


def affine(matrix, offset=0.0):
    a = np.asarray(matrix, dtype=float)
    if a.shape != (2, 2):
        raise DeformationError(f"affine matrix must be 2x2, got {a.shape}")
    det = float(np.linalg.det(a))
    if det <= 0:
        raise DeformationError(
            f"affine matrix must have positive determinant, got {det}"
        )
    d = 0.5 * complex(a[0, 0] + a[1, 1], a[1, 0] - a[0, 1])
    dbar = 0.5 * complex(a[0, 0] - a[1, 1], a[1, 0] + a[0, 1])
    offset = _complex_parameter(offset)
    return Deformation(
        name=DeformationKind.AFFINE.value,
        forward=lambda z: d * z + dbar * np.conj(z) + offset,
        holomorphic_derivative=lambda z: np.full_like(z, d),
        antiholomorphic_derivative=lambda z: np.full_like(z, dbar),
        parameters={"matrix": a.tolist(), "offset": [offset.real, offset.imag]},
    )


def quadratic(epsilon):
    eps = _complex_parameter(epsilon)
    return Deformation(
        name=DeformationKind.QUADRATIC.value,
        forward=lambda z: z + eps * z ** 2,
        holomorphic_derivative=lambda z: 1 + 2 * eps * z,
        antiholomorphic_derivative=lambda z: np.zeros_like(z),
        margin=lambda z: 1 - np.abs(2 * eps * z),
        parameters={"epsilon": [eps.real, eps.imag]},
    )


def conjugate_quadratic(epsilon):
    """f(z) = z + eps * conj(z)**2, whose dilatation 2*eps*conj(z) varies."""
    eps = _complex_parameter(epsilon)
    return Deformation(
        name=DeformationKind.CONJUGATE_QUADRATIC.value,
        forward=lambda z: z + eps * np.conj(z) ** 2,
        holomorphic_derivative=lambda z: np.ones_like(z),
        antiholomorphic_derivative=lambda z: 2 * eps * np.conj(z),
        margin=lambda z: 1 - np.abs(2 * eps * z),
        parameters={"epsilon": [eps.real, eps.imag]},
    )


def rigid(deformation, rotation=0.0, shift=0.0):
    """Post-composition z -> exp(i*rotation) * f(z) + shift."""
    turn = np.exp(1j * rotation)
    shift = _complex_parameter(shift)
    parameters = dict(deformation.parameters)
    parameters.update(rotation=float(rotation), shift=[shift.real, shift.imag])
    return Deformation(
        name=deformation.name,
        forward=lambda z: turn * deformation.forward(z) + shift,
        holomorphic_derivative=lambda z: turn
        * deformation.holomorphic_derivative(z),
        antiholomorphic_derivative=lambda z: turn
        * deformation.antiholomorphic_derivative(z),
        smoothness=deformation.smoothness,
        margin=deformation.margin,
        parameters=parameters,
    )


def region_points(region, density):
    x0, y0, x1, y1 = region
    xs = np.linspace(x0, x1, density + 1)
    ys = np.linspace(y0, y1, density + 1)
    return (xs[np.newaxis, :] + 1j * ys[:, np.newaxis]).ravel()


def deformation_validity(deformation, region=constants.DEFAULT_DOMAIN, density=64):
    """
    Samples the closed region on a (density+1)^2 lattice and reports
    det J_f, the singular-value bounds c1 <= |J h|/|h| <= c2, sup|mu|
    and the constructor margin, with the worst sampled point.
    """
    x0, y0, x1, y1 = region
    if not (np.isfinite([x0, y0, x1, y1]).all() and x0 < x1 and y0 < y1):
        raise DeformationError(f"region {region} must be bounded and nonempty")
    z = region_points(region, density)
    det = deformation.determinant(z)
    low, high = deformation.singular_values(z)
    abs_mu = np.abs(deformation.mu(z))
    if deformation.margin is not None:
        margin = np.asarray(deformation.margin(z), dtype=float)
    else:
        margin = np.ones_like(det)
    score = np.minimum(np.minimum(det, 1 - abs_mu), margin)
    worst = int(np.argmin(score))
    passed = bool(
        np.all(np.isfinite(score)) and det.min() > 0 and abs_mu.max() < 1
    ) and bool(margin.min() > 0)
    return ValidityReport(
        passed=passed,
        min_det=float(det.min()),
        c1=float(low.min()),
        c2=float(high.max()),
        max_abs_mu=float(abs_mu.max()),
        min_margin=float(margin.min()),
        worst_point=complex(z[worst]),
    )


DeformationSelector = {
    DeformationKind.IDENTITY: lambda spec: identity(),
    DeformationKind.AFFINE: lambda spec: affine(
        spec.pop("matrix"), spec.pop("offset", 0.0)
    ),
    DeformationKind.QUADRATIC: lambda spec: quadratic(spec.pop("epsilon")),
    DeformationKind.CONJUGATE_QUADRATIC: lambda spec: conjugate_quadratic(
        spec.pop("epsilon")
    ),
}


def make_deformation(spec, domain=None):
    """
    Builds a catalog deformation from a config/provenance mapping.

    ``kind`` selects the constructor; ``rotation`` and ``shift`` compose a
    rigid motion afterwards. With ``domain`` given, the result is checked
    there and a failure names the worst point.
    """
    spec = dict(spec)
    try:
        kind = DeformationKind(spec.pop("kind", "identity"))
    except ValueError as e:
        raise DeformationError(str(e)) from e
    rotation = spec.pop("rotation", 0.0)
    shift = spec.pop("shift", 0.0)
    try:
        deformation = DeformationSelector[kind](spec)
    except KeyError as e:
        raise DeformationError(
            f"{kind.value} deformation needs parameter {e}"
        ) from e
    if spec:
        raise DeformationError(
            f"unknown {kind.value} keys: {', '.join(sorted(spec))}"
        )
    if rotation or _complex_parameter(shift):
        deformation = rigid(deformation, rotation, shift)
    if domain is not None:
        report = deformation_validity(deformation, domain)
        if not report.passed:
            raise DeformationError(
                f"{kind.value} deformation is not valid on {tuple(domain)}: "
                f"fails at z={report.worst_point:.4g} (min det "
                f"{report.min_det:.3g}, max |mu| {report.max_abs_mu:.3g}, "
                f"margin {report.min_margin:.3g})",
                point=report.worst_point,
            )
        logger.debug(
            f"Deformation {kind.value} valid on {tuple(domain)}: "
            f"c1={report.c1:.4g}, c2={report.c2:.4g}"
        )
    return deformation
