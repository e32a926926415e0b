"""
Second-order quadratic variations of a sampled field.

For a direction h and bandwidth b the smoothed variation at t is

    B(t; h) = n^alpha / (n^2 b^2) * sum_w K((w - t)/b) * (D2 Y(w))^2,
    D2 Y(w) = Y(w) - 2 Y(w + h/n) + Y(w + 2h/n),

summed over the interior grid points w whose increment stencil is
sampled. Evaluation is only allowed where the kernel window fits inside
those points; nothing is renormalized at edges.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import signal

from dif_estimator import constants
from dif_estimator.exceptions import InvalidBandwidth, SupportClipped

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BandwidthSchedule:
    """b(n) = constant * n^(-exponent)"""

    constant: float = constants.BANDWIDTH_CONSTANT
    exponent: float = constants.BANDWIDTH_EXPONENT_CAP

    def __call__(self, n):
        return self.constant * float(n) ** (-self.exponent)

    @classmethod
    def default_for(cls, gamma, constant=constants.BANDWIDTH_CONSTANT):
        return cls(
            constant=constant,
            exponent=min(
                constants.BANDWIDTH_GAMMA_FRACTION * gamma,
                constants.BANDWIDTH_EXPONENT_CAP,
            ),
        )


@dataclass(frozen=True, eq=False)
class SmoothedVariationField:
    xs: np.ndarray
    ys: np.ndarray
    values: dict
    b: float
    n: int
    alpha: float
    kernel: str
    # direction name -> (d/dx B, d/dy B)
    derivatives: dict = field(default_factory=dict)

    @property
    def points(self):
        return (self.xs[np.newaxis, :] + 1j * self.ys[:, np.newaxis]).ravel()


class DecorrelationReport(NamedTuple):
    fitted_c: float
    ratios: dict
    passed: bool


def direction_vector(h):
    """Accepts a direction name, an (dx, dy) pair or a complex number."""
    if isinstance(h, str):
        h = constants.DIRECTIONS[h]
    if isinstance(h, complex):
        return int(h.real), int(h.imag)
    return int(h[0]), int(h[1])


def _as_point(t):
    if isinstance(t, (tuple, list)):
        return float(t[0]), float(t[1])
    t = complex(t)
    return t.real, t.imag


def _squared_increments(Y, h, rows=None, columns=None):
    """(D2 Y)^2 over the interior points whose stencil is sampled."""
    hx, hy = direction_vector(h)
    values = Y.values
    interior_rows, interior_columns = Y.grid.interior_shape
    if rows is None:
        rows = min(interior_rows, values.shape[0] - 2 * hy)
    if columns is None:
        columns = min(interior_columns, values.shape[1] - 2 * hx)
    increments = (
        values[:rows, :columns]
        - 2 * values[hy : rows + hy, hx : columns + hx]
        + values[2 * hy : rows + 2 * hy, 2 * hx : columns + 2 * hx]
    )
    return increments ** 2


def check_bandwidth(b):
    if b is None or not math.isfinite(b) or b <= 0:
        raise InvalidBandwidth(f"bandwidth b={b} must be positive")
    return b

def window_half_width(n, b, kernel):
    return int(math.floor(n * b * kernel.truncation_radius + constants.GRID_TOLERANCE))


def second_increment(Y, t, h):
    """Y(t) - 2 Y(t + h/n) + Y(t + 2h/n) at a grid point t."""
    hx, hy = direction_vector(h)
    x, y = _as_point(t)
    n = Y.n
    return (
        Y.value_at(x, y)
        - 2 * Y.value_at(x + hx / n, y + hy / n)
        + Y.value_at(x + 2 * hx / n, y + 2 * hy / n)
    )


def _point_window(Y, t, h, b, kernel):
    x, y = _as_point(t)
    n = Y.n
    squared = _squared_increments(Y, h)
    first_x, first_y = Y.grid.x_range[0], Y.grid.y_range[0]
    reach = b * kernel.truncation_radius
    tol = constants.GRID_TOLERANCE
    lo_x = math.ceil(n * (x - reach) - tol)
    hi_x = math.floor(n * (x + reach) + tol)
    lo_y = math.ceil(n * (y - reach) - tol)
    hi_y = math.floor(n * (y + reach) + tol)
    if (
        lo_x < first_x
        or lo_y < first_y
        or hi_x > first_x + squared.shape[1] - 1
        or hi_y > first_y + squared.shape[0] - 1
    ):
        raise SupportClipped(
            f"kernel window of radius {reach:.4g} around ({x:.4g}, {y:.4g}) "
            f"leaves the sampled increments"
        )
    window = squared[
        lo_y - first_y : hi_y - first_y + 1, lo_x - first_x : hi_x - first_x + 1
    ]
    u = (np.arange(lo_x, hi_x + 1) / n - x) / b
    v = (np.arange(lo_y, hi_y + 1) / n - y) / b
    return window, u[np.newaxis, :], v[:, np.newaxis]


def smoothed_variation(Y, t, h, b, kernel, alpha):
    """B_{n,b}(t; h) by direct summation."""
    check_bandwidth(b)
    window, u, v = _point_window(Y, t, h, b, kernel)
    n = Y.n
    weights = kernel.evaluate(u, v)
    return float(n ** alpha / (n ** 2 * b ** 2) * np.sum(weights * window))


def directional_derivative_B(Y, t, h, b, kernel, u, alpha):
    """d/du B_{n,b}(t; h) for a unit direction u, by direct summation."""
    check_bandwidth(b)
    window, ku, kv = _point_window(Y, t, h, b, kernel)
    ux, uy = _as_point(u)
    n = Y.n
    gx, gy = kernel.gradient(ku, kv)
    return float(
        -(n ** alpha) / (n ** 2 * b ** 3) * np.sum((ux * gx + uy * gy) * window)
    )


def evaluable_region(Y, b, kernel, directions=tuple(constants.DIRECTIONS)):
    """
    Index bounds (row_lo, row_hi, col_lo, col_hi), relative to the sample's
    first row/column, of the grid points where every direction's kernel
    window fits; plus the number of increment rows/columns shared by all
    directions.
    """
    rows, columns = Y.grid.interior_shape
    for name in directions:
        hx, hy = direction_vector(name)
        rows = min(rows, Y.values.shape[0] - 2 * hy)
        columns = min(columns, Y.values.shape[1] - 2 * hx)
    half = window_half_width(Y.n, b, kernel)
    return (half, rows - 1 - half, half, columns - 1 - half), (rows, columns)


def _kernel_stencils(n, b, kernel, half, with_derivative):
    offsets = np.arange(-half, half + 1) / (n * b)
    u, v = offsets[np.newaxis, :], offsets[:, np.newaxis]
    weights = kernel.evaluate(u, v)
    gradient = kernel.gradient(u, v) if with_derivative else None
    return weights, gradient


def smoothed_variation_field(
    Y,
    b,
    kernel,
    alpha,
    region=None,
    directions=tuple(constants.DIRECTIONS),
    with_derivative=False,
):
    """
    B_{n,b} on every evaluable grid point (optionally restricted to the
    rectangle ``region``) for each direction, by kernel correlation.

    :raises SupportClipped: when no grid point of the region is evaluable
    """
    check_bandwidth(b)
    n = Y.n
    (r_lo, r_hi, c_lo, c_hi), (rows, columns) = evaluable_region(
        Y, b, kernel, directions
    )
    xs, ys = Y.xs, Y.ys
    if region is not None:
        x0, y0, x1, y1 = region
        tol = constants.GRID_TOLERANCE
        wanted_c = np.flatnonzero((xs >= x0 - tol) & (xs <= x1 + tol))
        wanted_r = np.flatnonzero((ys >= y0 - tol) & (ys <= y1 + tol))
        if len(wanted_c) == 0 or len(wanted_r) == 0:
            raise SupportClipped(f"region {tuple(region)} holds no grid point")
        if (
            wanted_c[0] < c_lo
            or wanted_c[-1] > c_hi
            or wanted_r[0] < r_lo
            or wanted_r[-1] > r_hi
        ):
            logger.warning(
                f"Region {tuple(region)} reaches beyond the evaluable interior "
                f"at b={b:.4g}; clipping"
            )
        c_lo, c_hi = max(c_lo, wanted_c[0]), min(c_hi, wanted_c[-1])
        r_lo, r_hi = max(r_lo, wanted_r[0]), min(r_hi, wanted_r[-1])
    if r_lo > r_hi or c_lo > c_hi:
        raise SupportClipped(
            f"no evaluable point at n={n}, b={b:.4g}: the kernel window does "
            f"not fit inside the sampled increments"
        )
    half = window_half_width(n, b, kernel)
    weights, gradient = _kernel_stencils(n, b, kernel, half, with_derivative)
    scale = n ** alpha / (n ** 2 * b ** 2)
    values, derivatives = {}, {}
    for name in directions:
        squared = _squared_increments(Y, name, rows, columns)
        block = squared[r_lo - half : r_hi + half + 1, c_lo - half : c_hi + half + 1]
        smoothed = scale * signal.correlate(block, weights, mode="valid")
        # FFT correlation can leave roundoff-sized negatives
        values[name] = np.maximum(smoothed, 0.0)
        if with_derivative:
            derivatives[name] = tuple(
                -scale / b * signal.correlate(block, g, mode="valid")
                for g in gradient
            )
    logger.debug(
        f"Smoothed variation on {r_hi - r_lo + 1}x{c_hi - c_lo + 1} points, "
        f"n={n}, b={b:.4g}, window half-width {half}"
    )
    return SmoothedVariationField(
        xs=xs[c_lo : c_hi + 1].copy(),
        ys=ys[r_lo : r_hi + 1].copy(),
        values=values,
        b=b,
        n=n,
        alpha=alpha,
        kernel=kernel.kind.value,
        derivatives=derivatives,
    )


def variation_constant(alpha):
    return 8.0 - 2.0 ** (alpha + 1)


def g_true(deformation, t, h, alpha):
    """(8 - 2^(alpha+1)) |J_f(t) h|^alpha"""
    hx, hy = direction_vector(h)
    return variation_constant(alpha) * deformation.stretch(t, complex(hx, hy)) ** alpha


def increment_covariance_exact(model, deformation, t, s, h, n):
    """
    E[D2 Y(t) D2 Y(s)] = sum_ij d_i d_j R(|f(t + i h/n) - f(s + j h/n)|),
    vectorized over broadcastable arrays t and s of complex points.
    """
    hx, hy = direction_vector(h)
    step = complex(hx, hy) / n
    t = np.asarray(t, dtype=complex)
    s = np.asarray(s, dtype=complex)
    image_t = [deformation(t + i * step) for i in range(3)]
    image_s = [deformation(s + j * step) for j in range(3)]
    total = 0.0
    for i, di in enumerate(constants.DIFFERENCE_FILTER):
        for j, dj in enumerate(constants.DIFFERENCE_FILTER):
            total = total + di * dj * model.evaluate(np.abs(image_t[i] - image_s[j]))
    return total


def increment_moment_errors(model, deformation, h, n_values, points):
    """
    sup over ``points`` of |n^alpha E(D2 Y(t))^2 - g(t)| / g(t), for each n.
    """
    alpha = model.alpha
    points = np.asarray(points, dtype=complex)
    target = g_true(deformation, points, h, alpha)
    errors = []
    for n in n_values:
        second_moment = increment_covariance_exact(model, deformation, points, points, h, n)
        errors.append(float(np.max(np.abs(n ** alpha * second_moment - target) / target)))
    return errors


def _offset_ratios(model, deformation, h, n, center):
    hx, hy = direction_vector(h)
    half = n // 2
    k = np.arange(-half, half + 1)
    offsets = (k[np.newaxis, :] + 1j * k[:, np.newaxis]).ravel() / n
    distance = np.abs(offsets)
    far = distance > 3 * math.hypot(hx, hy) / n
    s = center + offsets[far]
    covariance = increment_covariance_exact(model, deformation, center, s, h, n)
    return np.abs(covariance) * n ** 4 * distance[far] ** (4 - model.alpha)


def increment_decorrelation_check(
    model,
    deformation,
    h=(1, 0),
    fit_n=64,
    check_ns=(128, 256),
    inflation=1.1,
    center=0.5 + 0.5j,
):
    """
    Fits c in |E D2Y(t) D2Y(s)| <= c n^-4 |t - s|^(alpha - 4) at ``fit_n``
    over offsets |t - s| > 3|h|/n inside the half-unit window, then checks
    the inflated bound at each of ``check_ns``.
    """
    fitted_c = float(np.max(_offset_ratios(model, deformation, h, fit_n, center)))
    ratios = {}
    for n in check_ns:
        ratios[n] = float(np.max(_offset_ratios(model, deformation, h, n, center)) / fitted_c)
    passed = all(ratio <= inflation for ratio in ratios.values())
    return DecorrelationReport(fitted_c=fitted_c, ratios=ratios, passed=passed)
