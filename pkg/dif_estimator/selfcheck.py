"""
Deterministic invariant checks run by ``manage.py selfcheck``. No check
draws a random field; random inputs come from fixed seeds.
"""
import logging
import time
from typing import NamedTuple

import numpy as np

from dif_estimator import constants
from dif_estimator.alignment import align
from dif_estimator.bergman import (
    DiskQuadrature,
    HolomorphicPoly,
    bergman_project,
    project_real_part_identity_check,
)
from dif_estimator.covariance import check_r3_bound, powered_exponential
from dif_estimator.deformations import affine, identity
from dif_estimator.dilatation import ellipse_coefficients, mu_tau_from_ellipse
from dif_estimator.qcmap import SpectralOperators, riemann_map
from dif_estimator.qvar import increment_moment_errors, increment_decorrelation_check
from dif_estimator.utils import philox_generator

logger = logging.getLogger(__name__)

SELFCHECK_SEED = 7


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def random_jacobians(count, seed=SELFCHECK_SEED, rejection=1e-2):
    """Jacobians with entries uniform in [-3, 3] and det > rejection * |J|_F^2."""
    rng = philox_generator(seed)
    batches = []
    kept = 0
    while kept < count:
        J = rng.uniform(-3.0, 3.0, size=(count, 2, 2))
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        good = J[det > rejection * np.sum(J ** 2, axis=(1, 2))]
        batches.append(good)
        kept += len(good)
    return np.concatenate(batches)[:count]


def ellipse_round_trip_errors(jacobians):
    """Max errors of recovered mu, tau and of the two determinant identities."""
    a11, a12 = jacobians[:, 0, 0], jacobians[:, 0, 1]
    a21, a22 = jacobians[:, 1, 0], jacobians[:, 1, 1]
    d = 0.5 * (a11 + a22 + 1j * (a21 - a12))
    dbar = 0.5 * (a11 - a22 + 1j * (a21 + a12))
    W1 = np.hypot(a11, a21)
    W2 = np.hypot(a12, a22)
    W3 = np.hypot(a11 + a12, a21 + a22)
    ellipse = ellipse_coefficients(W1, W2, W3)
    mu, tau = mu_tau_from_ellipse(ellipse, clamp=0.0)
    det = a11 * a22 - a12 * a21
    root = np.sqrt(ellipse.discriminant)
    return {
        "mu": float(np.max(np.abs(mu - dbar / d))),
        "tau": float(np.max(np.abs(tau - np.log(np.abs(d))))),
        "determinant": float(np.max(np.abs(root - 2 * det) / (2 * det))),
        "scale": float(
            np.max(
                np.abs(root + ellipse.a + ellipse.c - 4 * np.abs(d) ** 2)
                / (4 * np.abs(d) ** 2)
            )
        ),
    }


def check_ellipse_round_trip():
    errors = ellipse_round_trip_errors(random_jacobians(100000))
    worst = max(errors.values())
    return worst <= 1e-10, ", ".join(f"{k}={v:.2e}" for k, v in errors.items())


def check_increment_moment():
    model = powered_exponential(alpha=1.0).normalized()
    deformation = affine([[2.0, 0.0], [0.0, 1.0]])
    axis = np.linspace(0.2, 0.8, 7)
    points = (axis[np.newaxis, :] + 1j * axis[:, np.newaxis]).ravel()
    errors = increment_moment_errors(model, deformation, (1, 0), (64, 128, 256), points)
    decreasing = all(later < earlier for earlier, later in zip(errors, errors[1:]))
    return decreasing and errors[-1] <= 0.05, f"relative errors {errors}"


def check_increment_decorrelation():
    model = powered_exponential(alpha=1.0).normalized()
    report = increment_decorrelation_check(model, identity())
    return report.passed, f"c={report.fitted_c:.4g}, ratios {report.ratios}"


def check_covariance_remainder():
    report = check_r3_bound(powered_exponential(alpha=1.0).normalized(), 1e-3, 1.5)
    return not report.violated, f"violation ratio {report.violation_ratio:.3f}"


def check_bergman_monomials():
    quad = DiskQuadrature()
    worst = 0.0
    for k in range(11):
        expected = np.zeros(11, dtype=complex)
        expected[k] = 1.0
        projected = bergman_project(lambda z, k=k: np.real(z ** k), 10, quad)
        worst = max(worst, float(np.max(np.abs(projected.padded(10) - expected))))
    return worst <= 1e-10, f"max coefficient error {worst:.2e}"


def check_bergman_identity():
    rng = philox_generator(SELFCHECK_SEED)
    coefficients = rng.normal(size=9) + 1j * rng.normal(size=9)
    error = project_real_part_identity_check(HolomorphicPoly(coefficients), DiskQuadrature())
    return error <= 1e-10, f"max coefficient error {error:.2e}"


def check_beurling_convention():
    error = SpectralOperators(4.8, 256, self_test=False).check_convention()
    return error <= constants.BEURLING_SELF_TEST_TOLERANCE, f"bump error {error:.2e}"


def check_riemann_disk():
    quad = DiskQuadrature()
    theta = 2 * np.pi * np.arange(256) / 256
    center, radius = 0.3 + 0.1j, 0.5
    rho = riemann_map(
        center + radius * quad.nodes,
        radius ** 2 * quad.weights,
        center,
        boundary=center + radius * np.exp(1j * theta),
    )
    inner = center + 0.5 * radius * np.exp(1j * theta)
    error = float(np.max(np.abs(rho(inner) - (inner - center) / radius)))
    return error <= 1e-6, f"affine disk map error {error:.2e}"


def check_alignment():
    rng = philox_generator(SELFCHECK_SEED)
    truth = rng.normal(size=50) + 1j * rng.normal(size=50)
    theta, shift = np.pi / 4, 1 + 2j
    result = align(truth, np.exp(1j * theta) * truth + shift)
    error = max(abs(result.theta - theta), abs(result.shift - shift))
    return error <= 1e-12, f"parameter error {error:.2e}"


CheckSelector = {
    "ellipse_round_trip": check_ellipse_round_trip,
    "increment_moment": check_increment_moment,
    "increment_decorrelation": check_increment_decorrelation,
    "covariance_remainder": check_covariance_remainder,
    "bergman_monomials": check_bergman_monomials,
    "bergman_identity": check_bergman_identity,
    "beurling_convention": check_beurling_convention,
    "riemann_disk": check_riemann_disk,
    "alignment": check_alignment,
}


def run_selfcheck(names=None):
    results = []
    for name in names or CheckSelector:
        started = time.perf_counter()
        try:
            passed, detail = CheckSelector[name]()
        except Exception as e:
            logger.exception(f"Self-check {name} raised")
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - started
        logger.info(f"Self-check {name}: {'ok' if passed else 'FAILED'} ({detail})")
        results.append(CheckResult(name, bool(passed), detail, elapsed))
    return results
