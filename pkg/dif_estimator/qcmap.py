"""
Normalized quasiconformal map f_mu of a disk U onto the unit disk.

Construction:

1. mu is cut off smoothly outside U and placed on a periodic box;
2. the plane Beltrami equation is solved through the density h with
   h = mu S h + mu (S the Beurling transform as a Fourier multiplier),
   giving f~ = z + m conj(z - z0) + T h with dbar f~ = h and
   d f~ = 1 + S h (T the periodic Cauchy transform, m the mean of h);
3. the image f~(U) is mapped conformally onto the unit disk by the
   Bergman-kernel method;
4. a final rotation makes d f_mu(z0) real and positive.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.interpolate import RectBivariateSpline, RegularGridInterpolator

from dif_estimator import constants
from dif_estimator.bergman import DiskQuadrature, HolomorphicPoly
from dif_estimator.exceptions import (
    AliasingError,
    BeurlingConventionError,
    GeometryError,
    InversionFailure,
    NoConvergence,
    RiemannMapInaccurate,
)

logger = logging.getLogger(__name__)


def smooth_step(u):
    """Integral of the triweight profile 140 u^3 (1-u)^3 on [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    return 35 * u ** 4 - 84 * u ** 5 + 70 * u ** 6 - 20 * u ** 7


def radial_cutoff(distance, radius, outer_radius):
    """1 inside ``radius``, 0 beyond ``outer_radius``, C^3 in between."""
    return 1.0 - smooth_step((distance - radius) / (outer_radius - radius))


@dataclass(frozen=True, eq=False)
class PlaneBeltrami:
    center: complex
    side: float
    resolution: int
    mu: np.ndarray
    k: float
    radius: float
    outer_radius: float

    @property
    def xs(self):
        return (
            self.center.real
            - self.side / 2
            + self.side * np.arange(self.resolution) / self.resolution
        )

    @property
    def ys(self):
        return (
            self.center.imag
            - self.side / 2
            + self.side * np.arange(self.resolution) / self.resolution
        )

    @property
    def points(self):
        return self.xs[np.newaxis, :] + 1j * self.ys[:, np.newaxis]


class SpectralOperators:
    """
    d, dbar, the Beurling transform S and the Cauchy transform T as
    Fourier multipliers on a periodic M x M box of side L (arrays are
    indexed [y, x]). S and T annihilate the mean.
    """

    def __init__(self, side, resolution, self_test=True):
        self.side = side
        self.resolution = resolution
        wavenumbers = 2 * np.pi * np.fft.fftfreq(resolution, d=side / resolution)
        kx = wavenumbers[np.newaxis, :]
        ky = wavenumbers[:, np.newaxis]
        zeta = kx + 1j * ky
        self.dbar_symbol = 0.5j * zeta
        self.d_symbol = 0.5j * np.conj(zeta)
        nonzero = zeta != 0
        safe = np.where(nonzero, zeta, 1.0)
        self.beurling_symbol = np.where(nonzero, np.conj(zeta) / safe, 0.0)
        self.cauchy_symbol = np.where(nonzero, -2j / safe, 0.0)
        if self_test:
            self.check_convention()

    def _apply(self, symbol, values):
        return np.fft.ifft2(symbol * np.fft.fft2(values))

    def beurling(self, values):
        return self._apply(self.beurling_symbol, values)

    def cauchy(self, values):
        return self._apply(self.cauchy_symbol, values)

    def d(self, values):
        return self._apply(self.d_symbol, values)

    def dbar(self, values):
        return self._apply(self.dbar_symbol, values)

    def check_convention(self):
        """
        S applied to dbar(conj(z) B) must give d(conj(z) B) for the
        Gaussian bump B = exp(-|z|^2 / s^2) centred in the box.
        """
        coordinates = self.side * (
            np.arange(self.resolution) / self.resolution - 0.5
        )
        z = coordinates[np.newaxis, :] + 1j * coordinates[:, np.newaxis]
        width = self.side / 16
        bump = np.exp(-np.abs(z) ** 2 / width ** 2)
        dbar_phi = bump * (1 - np.abs(z) ** 2 / width ** 2)
        d_phi = -np.conj(z) ** 2 / width ** 2 * bump
        error = np.max(np.abs(self.beurling(dbar_phi) - d_phi)) / np.max(np.abs(d_phi))
        if error > constants.BEURLING_SELF_TEST_TOLERANCE:
            raise BeurlingConventionError(
                f"Beurling multiplier fails the bump self-test "
                f"(relative error {error:.3g}); check M={self.resolution}"
            )
        return error


@dataclass(frozen=True, eq=False)
class PlaneMap:
    """Discrete solution f~ of dbar f~ = mu~ d f~ on the periodic box."""

    problem: PlaneBeltrami
    periodic: np.ndarray  # f~ - z on the box
    h: np.ndarray  # dbar f~
    sh: np.ndarray  # d f~ - 1
    iterations: int
    increment: float
    ratios: tuple
    beltrami_residual: float

    def values(self):
        return self.problem.points + self.periodic

    def splines(self, half_width):
        return PlaneSplines(self, half_width)


class PlaneSplines:
    """Bicubic interpolation of f~ - z, dbar f~ and d f~ - 1 near U."""

    def __init__(self, plane, half_width):
        problem = plane.problem
        xs, ys = problem.xs, problem.ys
        cx, cy = problem.center.real, problem.center.imag
        columns = np.flatnonzero(np.abs(xs - cx) <= half_width)
        rows = np.flatnonzero(np.abs(ys - cy) <= half_width)
        if len(columns) < 4 or len(rows) < 4:
            raise GeometryError("solver box resolution too coarse for the disk")
        self.bounds = (xs[columns[0]], ys[rows[0]], xs[columns[-1]], ys[rows[-1]])
        sub_x, sub_y = xs[columns], ys[rows]

        def spline(values):
            block = values[rows[0] : rows[-1] + 1, columns[0] : columns[-1] + 1]
            return (
                RectBivariateSpline(sub_y, sub_x, block.real),
                RectBivariateSpline(sub_y, sub_x, block.imag),
            )

        self._periodic = spline(plane.periodic)
        self._h = spline(plane.h)
        self._sh = spline(plane.sh)

    def contains(self, z):
        x0, y0, x1, y1 = self.bounds
        z = np.asarray(z)
        return (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)

    @staticmethod
    def _evaluate(pair, z):
        z = np.asarray(z, dtype=complex)
        y, x = z.imag.ravel(), z.real.ravel()
        values = pair[0].ev(y, x) + 1j * pair[1].ev(y, x)
        return values.reshape(z.shape)

    def forward(self, z):
        return np.asarray(z, dtype=complex) + self._evaluate(self._periodic, z)

    def d(self, z):
        return 1.0 + self._evaluate(self._sh, z)

    def dbar(self, z):
        return self._evaluate(self._h, z)


@dataclass(frozen=True, eq=False)
class RiemannMap:
    """rho: D~ -> unit disk with rho(anchor) = 0 and rho'(anchor) > 0."""

    mapping: HolomorphicPoly
    derivative: HolomorphicPoly
    anchor: complex
    degree: int
    boundary_error: float

    def __call__(self, w):
        return self.mapping(w)


class QCMap:
    """
    The normalized map f_mu of disk(center, radius) onto the unit disk,
    evaluated through the plane-solution splines and the Riemann map.
    """

    def __init__(
        self,
        center,
        radius,
        plane,
        splines,
        riemann,
        inverse_margin=constants.INVERSE_MARGIN,
        inversion_tolerance=constants.INVERSION_TOLERANCE,
    ):
        self.center = complex(center)
        self.radius = float(radius)
        self.plane = plane
        self.splines = splines
        self.riemann = riemann
        self.anchor = riemann.anchor
        self.k = plane.problem.k
        self.resolution = plane.problem.resolution
        self.inverse_margin = inverse_margin
        self.inversion_tolerance = inversion_tolerance
        lead = riemann.derivative(self.anchor) * splines.d(self.center)
        self.rotation = np.conj(lead) / np.abs(lead)
        self.inverse_table = self._build_inverse_table()

    def __call__(self, z):
        return self.rotation * self.riemann(self.splines.forward(z))

    def derivatives(self, z):
        """(d f_mu, dbar f_mu) at z."""
        outer = self.rotation * self.riemann.derivative(self.splines.forward(z))
        return outer * self.splines.d(z), outer * self.splines.dbar(z)

    def complex_derivative(self, z):
        return self.derivatives(z)[0]

    def measured_dilatation(self, z, step=None):
        """Central-difference dbar F / d F of the evaluated map."""
        z = np.asarray(z, dtype=complex)
        step = 1e-4 * self.radius if step is None else step
        fx = (self(z + step) - self(z - step)) / (2 * step)
        fy = (self(z + 1j * step) - self(z - 1j * step)) / (2 * step)
        return (fx + 1j * fy) / (fx - 1j * fy)

    def jacobian_determinant(self, z, step=None):
        z = np.asarray(z, dtype=complex)
        step = 1e-4 * self.radius if step is None else step
        fx = (self(z + step) - self(z - step)) / (2 * step)
        fy = (self(z + 1j * step) - self(z - 1j * step)) / (2 * step)
        return fx.real * fy.imag - fx.imag * fy.real

    def boundary_deviation(self, samples=constants.BOUNDARY_SAMPLES):
        theta = 2 * np.pi * np.arange(samples) / samples
        return float(
            np.max(np.abs(np.abs(self(self.center + self.radius * np.exp(1j * theta))) - 1))
        )

    def _newton(self, w, z):
        """Vectorized damped Newton for F(z) = w; returns (z, residual)."""
        w = np.asarray(w, dtype=complex)
        z = np.array(z, dtype=complex)
        error = w - self(z)
        residual = np.abs(error)
        for _ in range(constants.NEWTON_MAX_ITER):
            active = residual >= self.inversion_tolerance
            if not active.any():
                break
            d, dbar = self.derivatives(z[active])
            e = error[active]
            step = (np.conj(d) * e - dbar * np.conj(e)) / (np.abs(d) ** 2 - np.abs(dbar) ** 2)
            current = z[active]
            best_z, best_error = current, e
            best_residual = residual[active]
            improved = np.zeros(current.shape, dtype=bool)
            for _ in range(8):
                candidate = current + step
                inside = self.splines.contains(candidate)
                candidate_error = np.where(inside, w[active] - self(np.where(inside, candidate, current)), np.inf)
                candidate_residual = np.abs(candidate_error)
                better = ~improved & (candidate_residual < best_residual)
                best_z = np.where(better, candidate, best_z)
                best_error = np.where(better, candidate_error, best_error)
                best_residual = np.where(better, candidate_residual, best_residual)
                improved |= better
                if improved.all():
                    break
                step = np.where(improved, step, step / 2)
            if not improved.any():
                break
            z[active] = best_z
            error[active] = best_error
            residual[active] = best_residual
        return z, residual

    def _build_inverse_table(self):
        radii = np.linspace(0.0, 1.0 - self.inverse_margin, constants.INVERSE_TABLE_RADII)
        angles = 2 * np.pi * np.arange(constants.INVERSE_TABLE_ANGLES) / constants.INVERSE_TABLE_ANGLES
        table = np.empty((len(radii), len(angles)), dtype=complex)
        table[0] = self.center
        d, dbar = self.derivatives(np.array([self.center]))
        d, dbar = d[0], dbar[0]
        previous = None
        for i, r in enumerate(radii[1:], start=1):
            w = r * np.exp(1j * angles)
            if previous is None:
                # exact inverse of the linearization at the centre
                guess = self.center + (np.conj(d) * w - dbar * np.conj(w)) / (abs(d) ** 2 - abs(dbar) ** 2)
            else:
                guess = self.center + (previous - self.center) * (r / radii[i - 1])
            z, residual = self._newton(w, guess)
            if np.any(residual >= self.inversion_tolerance):
                raise InversionFailure(
                    f"inverse table ring |w|={r:.3f} did not converge "
                    f"(residual {residual.max():.3g})"
                )
            table[i] = z
            previous = z
        logger.debug(f"Inverse table built on {table.shape[0]}x{table.shape[1]} polar nodes")
        return radii, angles, table

    def _initial_guess(self, w):
        radii, angles, table = self.inverse_table
        wrapped_angles = np.append(angles, 2 * np.pi)
        wrapped = np.concatenate([table, table[:, :1]], axis=1)
        where = np.stack(
            [np.clip(np.abs(w), 0, radii[-1]), np.mod(np.angle(w), 2 * np.pi)], axis=-1
        )
        real = RegularGridInterpolator((radii, wrapped_angles), wrapped.real)(where)
        imag = RegularGridInterpolator((radii, wrapped_angles), wrapped.imag)(where)
        return real + 1j * imag

    def invert_many(self, w):
        """
        Inverse images of disk points; returns (z, failed) where ``failed``
        marks points outside radius 1 - inverse_margin or without
        convergence.
        """
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        shape = w.shape
        w = w.ravel()
        outside = np.abs(w) > 1.0 - self.inverse_margin + 1e-12
        z = np.full(w.shape, np.nan + 1j * np.nan)
        if (~outside).any():
            inner = w[~outside]
            solved, residual = self._newton(inner, self._initial_guess(inner))
            converged = residual < self.inversion_tolerance
            z[np.flatnonzero(~outside)[converged]] = solved[converged]
        failed = np.isnan(z.real)
        return z.reshape(shape), failed.reshape(shape)

    def inverse(self, w):
        z, failed = self.invert_many(np.array([w]))
        if failed[0]:
            raise InversionFailure(f"could not invert w={complex(w):.6g}")
        return complex(z[0])


def truncate_mu(
    field,
    center,
    radius,
    outer_radius=None,
    side=None,
    resolution=constants.SOLVER_RESOLUTION,
):
    """
    Places chi * mu_ext on the periodic solver box, chi the radial cutoff
    between ``radius`` and ``outer_radius`` and mu_ext the field's
    bilinear interpolation (nearest value beyond the field's rectangle).
    """
    center = complex(center)
    outer_radius = constants.OUTER_RADIUS_FACTOR * radius if outer_radius is None else outer_radius
    side = constants.BOX_FACTOR * 2 * radius if side is None else side
    if not radius < outer_radius:
        raise GeometryError(f"outer radius {outer_radius} must exceed radius {radius}")
    if outer_radius >= side / 4:
        raise GeometryError(
            f"solver box side {side} too small for cutoff radius {outer_radius}"
        )
    x0, y0, x1, y1 = field.region
    step = max(np.max(np.diff(field.xs), initial=0.0), np.max(np.diff(field.ys), initial=0.0))
    if (
        center.real - radius < x0 - step
        or center.real + radius > x1 + step
        or center.imag - radius < y0 - step
        or center.imag + radius > y1 + step
    ):
        raise GeometryError(
            f"disk U(center={center}, r={radius}) is not inside the dilatation "
            f"field region {tuple(round(v, 6) for v in field.region)}"
        )
    problem_points = PlaneBeltrami(center, side, resolution, None, 0.0, radius, outer_radius).points
    distance = np.abs(problem_points - center)
    chi = radial_cutoff(distance, radius, outer_radius)
    mu = np.zeros(problem_points.shape, dtype=complex)
    support = chi > 0
    mu[support] = chi[support] * field.interpolate_mu(problem_points[support])
    k = float(np.max(np.abs(mu)))
    logger.debug(f"Truncated mu on {resolution}^2 box of side {side:.4g}, k={k:.4f}")
    return PlaneBeltrami(center, side, resolution, mu, k, radius, outer_radius)


def aliasing_ratio(sh):
    """
    Largest |S h| on the box boundary relative to its peak. S h decays
    like |z|^-2 away from the support of mu, so a large ratio means the
    periodic images of the support interact.
    """
    peak = float(np.max(np.abs(sh)))
    if peak == 0:
        return 0.0
    edge = max(
        np.abs(sh[0]).max(),
        np.abs(sh[-1]).max(),
        np.abs(sh[:, 0]).max(),
        np.abs(sh[:, -1]).max(),
    )
    return float(edge) / peak


def finite_difference_derivatives(values, spacing):
    """
    (d f, dbar f) of grid samples indexed [y, x] by fourth-order central
    differences; the two outermost rows and columns are NaN.
    """
    values = np.asarray(values, dtype=complex)
    fx = np.full(values.shape, np.nan, dtype=complex)
    fy = np.full(values.shape, np.nan, dtype=complex)
    fx[:, 2:-2] = (
        values[:, :-4] - 8 * values[:, 1:-3] + 8 * values[:, 3:-1] - values[:, 4:]
    ) / (12 * spacing)
    fy[2:-2, :] = (
        values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]
    ) / (12 * spacing)
    return (fx - 1j * fy) / 2, (fx + 1j * fy) / 2


def beltrami_residual(problem, values):
    """max |dbar f - mu d f| over the grid nodes of U, by finite differences."""
    d, dbar = finite_difference_derivatives(values, problem.side / problem.resolution)
    inside = (np.abs(problem.points - problem.center) <= problem.radius) & np.isfinite(d)
    return float(np.max(np.abs(dbar - problem.mu * d)[inside]))


def solve_beltrami_plane(
    problem,
    tol=constants.BELTRAMI_TOLERANCE,
    max_iter=constants.BELTRAMI_MAX_ITER,
    operators=None,
):
    """
    Fixed-point iteration h <- mu S h + mu from h = mu.

    :raises NoConvergence: when ``max_iter`` is reached above ``tol``
    :raises AliasingError: when S h has not decayed at the box boundary
    """
    if problem.k >= 1:
        raise NoConvergence(f"sup |mu| = {problem.k} is not below 1", k=problem.k)
    if operators is None:
        operators = SpectralOperators(problem.side, problem.resolution)
    mu = problem.mu
    h = mu.copy()
    ratios = []
    previous = None
    increment = 0.0
    for iteration in range(1, max_iter + 1):
        updated = mu * operators.beurling(h) + mu
        increment = float(np.max(np.abs(updated - h)))
        if previous:
            ratios.append(increment / previous)
        previous = increment
        h = updated
        if increment < tol:
            break
    else:
        raise NoConvergence(
            f"Beltrami iteration stalled after {max_iter} steps: k={problem.k:.4f}, "
            f"increment {increment:.3g} > tol {tol:.3g}",
            k=problem.k,
            residual=increment,
        )
    tail = ratios[len(ratios) // 2 :]
    if tail and np.median(tail) > problem.k + constants.CONTRACTION_SLACK:
        logger.warning(
            f"Beltrami contraction ratio {np.median(tail):.3f} exceeds "
            f"k + slack = {problem.k + constants.CONTRACTION_SLACK:.3f}"
        )
    sh = operators.beurling(h)
    wrap = aliasing_ratio(sh)
    if wrap > constants.ALIASING_THRESHOLD:
        raise AliasingError(
            f"|S h| on the box boundary is {wrap:.3g} of its peak; "
            f"enlarge the solver box"
        )
    mean = h.mean()
    offset = np.conj(problem.points - problem.center)
    periodic = operators.cauchy(h) + mean * offset
    residual = beltrami_residual(problem, problem.points + periodic)
    logger.info(
        f"Beltrami solve converged in {iteration} iterations, k={problem.k:.4f}, "
        f"residual {residual:.3g}"
    )
    return PlaneMap(
        problem=problem,
        periodic=periodic,
        h=h,
        sh=sh,
        iterations=iteration,
        increment=increment,
        ratios=tuple(ratios),
        beltrami_residual=residual,
    )


def riemann_map(
    nodes,
    weights,
    anchor,
    degree=constants.RIEMANN_DEGREE,
    boundary=None,
    tol=constants.BOUNDARY_TOLERANCE,
):
    """
    Riemann map of a Jordan domain D~ by Bergman-kernel orthonormalization.

    :param nodes: area quadrature nodes covering D~
    :param weights: their area weights
    :param anchor: interior point sent to 0
    :param boundary: samples of the boundary of D~, checked against |rho| = 1
    """
    nodes = np.asarray(nodes, dtype=complex).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    anchor = complex(anchor)
    scale = float(np.max(np.abs(boundary - anchor))) if boundary is not None else float(np.max(np.abs(nodes - anchor)))
    zeta = (nodes - anchor) / scale
    vandermonde = np.sqrt(weights)[:, np.newaxis] * zeta[:, np.newaxis] ** np.arange(degree + 1)
    _, upper = np.linalg.qr(vandermonde)
    used = degree
    while used > 1 and np.linalg.cond(upper[: used + 1, : used + 1]) > constants.RIEMANN_CONDITION_LIMIT:
        used -= 1
    if used < degree:
        logger.warning(f"Riemann map degree reduced from {degree} to {used} (ill-conditioned Gram matrix)")
    upper = upper[: used + 1, : used + 1]
    inverse = linalg.solve_triangular(upper, np.eye(used + 1, dtype=complex))
    at_anchor = inverse[0, :]
    kernel = inverse @ np.conj(at_anchor)
    kernel_at_anchor = float(np.sum(np.abs(at_anchor) ** 2))
    coefficients = np.sqrt(np.pi / kernel_at_anchor) * kernel
    derivative = HolomorphicPoly(coefficients, anchor, scale)
    mapping = derivative.antiderivative()
    boundary_error = 0.0
    if boundary is not None:
        boundary_error = float(np.max(np.abs(np.abs(mapping(boundary)) - 1)))
        if boundary_error > tol:
            raise RiemannMapInaccurate(
                f"Riemann map of degree {used} misses the unit circle by "
                f"{boundary_error:.3g} > {tol:.3g}"
            )
    logger.debug(f"Riemann map degree {used}, boundary error {boundary_error:.3g}")
    return RiemannMap(
        mapping=mapping,
        derivative=derivative,
        anchor=anchor,
        degree=used,
        boundary_error=boundary_error,
    )


def build_qcmap(
    field,
    center=constants.DEFAULT_DISK_CENTER,
    radius=constants.DEFAULT_DISK_RADIUS,
    outer_radius=None,
    side=None,
    resolution=constants.SOLVER_RESOLUTION,
    tol=constants.BELTRAMI_TOLERANCE,
    max_iter=constants.BELTRAMI_MAX_ITER,
    riemann_degree=constants.RIEMANN_DEGREE,
    boundary_tolerance=constants.BOUNDARY_TOLERANCE,
    quadrature=None,
    inverse_margin=constants.INVERSE_MARGIN,
):
    """f_mu = rotation * rho o f~ restricted to disk(center, radius)."""
    center = complex(center)
    problem = truncate_mu(field, center, radius, outer_radius, side, resolution)
    plane = solve_beltrami_plane(problem, tol, max_iter)
    spacing = problem.side / problem.resolution
    splines = plane.splines(1.25 * radius + 4 * spacing)
    quadrature = quadrature or DiskQuadrature()
    disk_nodes = center + radius * quadrature.nodes
    jacobian = np.abs(splines.d(disk_nodes)) ** 2 - np.abs(splines.dbar(disk_nodes)) ** 2
    if np.any(jacobian <= 0):
        raise GeometryError("plane solution is not orientation preserving on U")
    theta = 2 * np.pi * np.arange(constants.BOUNDARY_SAMPLES) / constants.BOUNDARY_SAMPLES
    boundary = splines.forward(center + radius * np.exp(1j * theta))
    anchor = complex(splines.forward(np.array([center]))[0])
    riemann = riemann_map(
        splines.forward(disk_nodes),
        radius ** 2 * quadrature.weights * jacobian,
        anchor,
        riemann_degree,
        boundary,
        boundary_tolerance,
    )
    qcmap = QCMap(center, radius, plane, splines, riemann, inverse_margin=inverse_margin)
    logger.info(
        f"Built quasiconformal map on disk({center:.4g}, {radius:.4g}): "
        f"k={qcmap.k:.4f}, Riemann degree {riemann.degree}, boundary error "
        f"{riemann.boundary_error:.3g}"
    )
    return qcmap


def invert_qcmap(qcmap, w):
    return qcmap.inverse(w)
