"""
Reconstruction of the deformation from the estimated dilatation.

f = g o f_mu with g conformal on the unit disk, and

    log|g'(w)| = tau(f_mu^-1(w)) - log|d f_mu(f_mu^-1(w))|,

so the Bergman projection of that harmonic function gives log g' up to
an imaginary constant (the unidentifiable rotation) and g follows by
integrating exp(log g') from 0 (the unidentifiable translation).
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from dif_estimator import constants
from dif_estimator.bergman import (
    DiskQuadrature,
    bergman_project,
    integrate_exp_along_segment,
)
from dif_estimator.decorators import pipeline_stage
from dif_estimator.dilatation import DilatationField, estimate_dilatation_field
from dif_estimator.exceptions import GeometryError, MaskedNodesError
from dif_estimator.qcmap import build_qcmap
from dif_estimator.qvar import evaluable_region

logger = logging.getLogger(__name__)


class LogDerivativeSamples(NamedTuple):
    values: np.ndarray
    masked: np.ndarray
    origin_value: float

    @property
    def masked_fraction(self):
        return float(np.mean(self.masked))


@dataclass(frozen=True, eq=False)
class ReconstructedMap:
    """f^ = g^ o f_mu^ on the sub-disk of radius eval_fraction * r of U."""

    qcmap: object
    projection: object
    dilatation: DilatationField
    log_derivative: LogDerivativeSamples
    eval_fraction: float = constants.EVAL_FRACTION
    segment_nodes: int = constants.SEGMENT_NODES
    bandwidth: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    @property
    def center(self):
        return self.qcmap.center

    @property
    def radius(self):
        return self.qcmap.radius

    def g(self, w):
        return integrate_exp_along_segment(self.projection, w, self.segment_nodes)

    def g_derivative(self, w):
        return np.exp(self.projection(w))

    def evaluable(self, z):
        z = np.asarray(z, dtype=complex)
        return np.abs(z - self.center) <= self.eval_fraction * self.radius * (1 + 1e-12)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if not np.all(self.evaluable(z)):
            raise GeometryError(
                f"f^ is evaluable only within {self.eval_fraction:.3g} r of the "
                f"disk centre {self.center:.6g}"
            )
        return self.g(self.qcmap(z))

    def evaluation_grid(self, count=constants.FORWARD_TABLE_POINTS):
        extent = self.eval_fraction * self.radius
        offsets = np.linspace(-extent, extent, count)
        points = self.center + offsets[np.newaxis, :] + 1j * offsets[:, np.newaxis]
        return points[self.evaluable(points)]


def _fill_from_nearest(nodes, values, masked):
    if not masked.any():
        return values
    valid = np.flatnonzero(~masked)
    filled = values.copy()
    for index in np.flatnonzero(masked):
        nearest = valid[np.argmin(np.abs(nodes[valid] - nodes[index]))]
        filled[index] = values[nearest]
    return filled


def estimate_log_gprime(dilatation, qcmap, nodes, data_radius=None):
    """
    Samples of log|g'| at disk nodes. Nodes beyond ``data_radius`` (default
    1 - inverse margin) take the value at their radial projection onto
    that circle; nodes whose inversion fails are masked and filled from the
    nearest valid node.

    :raises MaskedNodesError: when more than 5% of the nodes are masked
    """
    nodes = np.asarray(nodes, dtype=complex)
    data_radius = 1.0 - qcmap.inverse_margin if data_radius is None else data_radius
    modulus = np.abs(nodes)
    where = np.where(modulus > data_radius, nodes * (data_radius / np.maximum(modulus, 1e-300)), nodes)
    z, failed = qcmap.invert_many(where)
    values = np.full(nodes.shape, np.nan)
    ok = ~failed
    values[ok] = dilatation.interpolate_tau(z[ok]) - np.log(np.abs(qcmap.complex_derivative(z[ok])))
    fraction = float(np.mean(failed))
    if fraction > constants.MASKED_NODE_LIMIT:
        raise MaskedNodesError(
            f"{fraction:.1%} of the disk nodes could not be inverted; "
            f"reduce the evaluation fraction or the inverse data radius"
        )
    if failed.any():
        logger.warning(f"{int(failed.sum())} disk nodes masked ({fraction:.2%})")
    values = _fill_from_nearest(nodes, values, failed)
    center = np.array([qcmap.center])
    origin_value = float(
        dilatation.interpolate_tau(center)[0] - np.log(np.abs(qcmap.complex_derivative(center)[0]))
    )
    return LogDerivativeSamples(values=values, masked=failed, origin_value=origin_value)


def reconstruct_g(values, origin_value, degree, quad, segment_nodes=constants.SEGMENT_NODES):
    """
    Projects log|g'| samples and returns (P log|g'|, g^) with
    g^(w) = int_0^w exp(P log|g'|) so that g^(0) = 0.
    """
    projection = bergman_project(values, degree, quad, origin_value=origin_value)

    def g(w):
        return integrate_exp_along_segment(projection, w, segment_nodes)

    return projection, g


def estimation_region(Y, center, radius, b, kernel):
    """
    Bounding square of disk(center, radius) padded by one grid step and
    clipped to the evaluable interior of the sample.
    """
    step = 1.0 / Y.n
    (r_lo, r_hi, c_lo, c_hi), _ = evaluable_region(Y, b, kernel)
    if r_lo > r_hi or c_lo > c_hi:
        raise GeometryError(f"no evaluable point at n={Y.n}, b={b:.4g}")
    xs, ys = Y.xs, Y.ys
    evaluable = (xs[c_lo], ys[r_lo], xs[c_hi], ys[r_hi])
    wanted = (
        center.real - radius - step,
        center.imag - radius - step,
        center.real + radius + step,
        center.imag + radius + step,
    )
    slack = step + constants.GRID_TOLERANCE
    if (
        wanted[0] + step < evaluable[0] - slack
        or wanted[1] + step < evaluable[1] - slack
        or wanted[2] - step > evaluable[2] + slack
        or wanted[3] - step > evaluable[3] + slack
    ):
        raise GeometryError(
            f"disk U(center={center}, r={radius}) reaches more than one grid "
            f"step outside the evaluable interior {tuple(np.round(evaluable, 6))}"
        )
    return (
        max(wanted[0], evaluable[0]),
        max(wanted[1], evaluable[1]),
        min(wanted[2], evaluable[2]),
        min(wanted[3], evaluable[3]),
    )


def _region_axes(Y, region):
    x0, y0, x1, y1 = region
    tol = constants.GRID_TOLERANCE
    xs, ys = Y.xs, Y.ys
    return (
        xs[(xs >= x0 - tol) & (xs <= x1 + tol)],
        ys[(ys >= y0 - tol) & (ys <= y1 + tol)],
    )


@pipeline_stage("dilatation")
def dilatation_stage(Y, config, deformation=None):
    solver = config.solver
    center, radius = solver.disk_center, solver.radius
    if solver.exact_injection:
        if deformation is None:
            deformation = config.deformation_map()
        step = 1.0 / Y.n
        region = (
            center.real - radius - step,
            center.imag - radius - step,
            center.real + radius + step,
            center.imag + radius + step,
        )
        xs, ys = _region_axes(Y, region)
        logger.info(f"Injecting exact mu and tau of the {deformation.name} deformation")
        return DilatationField.from_deformation(deformation, xs, ys), None
    model = config.covariance()
    b = config.bandwidth_for(Y.n, model)
    kernel = config.kernel()
    region = estimation_region(Y, center, radius, b, kernel)
    field_estimate = estimate_dilatation_field(
        Y, region, b, kernel, model.alpha, clamp=solver.mu_clamp
    )
    return field_estimate, b


@pipeline_stage("qcmap")
def qcmap_stage(dilatation, config):
    solver = config.solver
    return build_qcmap(
        dilatation,
        center=solver.disk_center,
        radius=solver.radius,
        outer_radius=solver.outer_radius_factor * solver.radius,
        side=solver.box_factor * 2 * solver.radius,
        resolution=solver.resolution,
        tol=solver.tolerance,
        max_iter=solver.max_iterations,
        riemann_degree=solver.riemann_degree,
        boundary_tolerance=solver.boundary_tolerance,
        quadrature=DiskQuadrature(solver.quadrature_radial, solver.quadrature_angular),
        inverse_margin=solver.inverse_margin,
    )


@pipeline_stage("log_gprime")
def log_gprime_stage(dilatation, qcmap, quad):
    return estimate_log_gprime(dilatation, qcmap, quad.nodes)


@pipeline_stage("projection")
def projection_stage(samples, config, quad):
    return reconstruct_g(
        samples.values,
        samples.origin_value,
        config.solver.bergman_degree,
        quad,
        config.solver.segment_nodes,
    )


def reconstruct_f(Y, config, deformation=None):
    """
    Full pipeline from a field sample to the evaluable map f^.

    With ``config.solver.exact_injection`` the catalog mu and tau of
    ``deformation`` (default: the configured one) replace the estimates.

    :raises StageError: naming the failed stage
    """
    solver = config.solver
    dilatation, b = dilatation_stage(Y, config, deformation)
    qcmap = qcmap_stage(dilatation, config)
    quad = DiskQuadrature(solver.quadrature_radial, solver.quadrature_angular)
    samples = log_gprime_stage(dilatation, qcmap, quad)
    projection, _ = projection_stage(samples, config, quad)
    reconstructed = ReconstructedMap(
        qcmap=qcmap,
        projection=projection,
        dilatation=dilatation,
        log_derivative=samples,
        eval_fraction=solver.eval_fraction,
        segment_nodes=solver.segment_nodes,
        bandwidth=b,
        provenance={
            "sample": {"n": Y.n, "seed": Y.seed, "sampler": Y.sampler.value},
            "bandwidth": b,
            "solver": {
                "resolution": solver.resolution,
                "tolerance": solver.tolerance,
                "riemann_degree": qcmap.riemann.degree,
                "bergman_degree": solver.bergman_degree,
                "exact_injection": solver.exact_injection,
            },
        },
    )
    logger.info(
        f"Reconstructed f on disk({qcmap.center:.4g}, {qcmap.radius:.4g}) from "
        f"n={Y.n}{' (exact injection)' if solver.exact_injection else ''}"
    )
    return reconstructed
