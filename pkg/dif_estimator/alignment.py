"""
Alignment of an estimated map with the truth modulo rotation and
translation, the two quantities the data cannot identify.
"""
import logging
from typing import NamedTuple

import numpy as np

from dif_estimator import constants
from dif_estimator.exceptions import AlignmentError

logger = logging.getLogger(__name__)


class AlignmentResult(NamedTuple):
    theta: float
    shift: complex
    sup_error: float
    rms_error: float
    count: int
    description: str = ""


def align(truth, estimate, description=""):
    """
    Least-squares rigid motion z -> e^{i theta} z + c taking ``truth`` onto
    ``estimate``:

        theta = arg sum (est_k - mean est) conj(truth_k - mean truth)
        c     = mean est - e^{i theta} mean truth

    :raises AlignmentError: on mismatched inputs or coincident points
    """
    truth = np.asarray(truth, dtype=complex).ravel()
    estimate = np.asarray(estimate, dtype=complex).ravel()
    if truth.shape != estimate.shape:
        raise AlignmentError(
            f"{truth.size} truth samples for {estimate.size} estimates"
        )
    if truth.size < 2:
        raise AlignmentError("alignment needs at least two points")
    if not (np.all(np.isfinite(truth)) and np.all(np.isfinite(estimate))):
        raise AlignmentError("non-finite samples")
    truth_mean, estimate_mean = truth.mean(), estimate.mean()
    centred_truth = truth - truth_mean
    if np.max(np.abs(centred_truth)) == 0:
        raise AlignmentError("all truth points coincide; rotation undefined")
    cross = np.sum((estimate - estimate_mean) * np.conj(centred_truth))
    theta = float(np.angle(cross)) if cross != 0 else 0.0
    turn = np.exp(1j * theta)
    shift = complex(estimate_mean - turn * truth_mean)
    residual = np.abs(turn * truth + shift - estimate)
    return AlignmentResult(
        theta=theta,
        shift=shift,
        sup_error=float(residual.max()),
        rms_error=float(np.sqrt(np.mean(residual ** 2))),
        count=int(truth.size),
        description=description,
    )


def disk_evaluation_points(center, radius, fraction=constants.METRIC_FRACTION, count=33):
    """Square lattice points inside disk(center, fraction * radius)."""
    extent = fraction * radius
    offsets = np.linspace(-extent, extent, count)
    lattice = (offsets[np.newaxis, :] + 1j * offsets[:, np.newaxis]).ravel()
    return complex(center) + lattice[np.abs(lattice) <= extent * (1 + 1e-12)]


def aligned_error(deformation, reconstructed, fraction=constants.METRIC_FRACTION, count=33):
    """Aligned error of a reconstructed map against a catalog deformation."""
    points = disk_evaluation_points(reconstructed.center, reconstructed.radius, fraction, count)
    result = align(
        deformation(points),
        reconstructed(points),
        description=(
            f"disk(center={reconstructed.center:.6g}, "
            f"radius={fraction * reconstructed.radius:.6g}), {points.size} points"
        ),
    )
    logger.info(
        f"Aligned error sup={result.sup_error:.4g} rms={result.rms_error:.4g} "
        f"theta={result.theta:.4f}"
    )
    return result
