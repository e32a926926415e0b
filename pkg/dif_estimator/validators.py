import logging

import numpy as np

from dif_estimator import constants
from dif_estimator.constants import RunMode
from dif_estimator.exceptions import ConfigValidationError, DeformedFieldException
from dif_estimator.qvar import window_half_width

logger = logging.getLogger(__name__)

VARIATION_EXPONENT_LIMIT = 1.0 / 3.0
DERIVATIVE_EXPONENT_LIMIT = 0.25


class BandwidthValidator(object):
    """
    Checks a bandwidth decay exponent against the rate contract of a run:
    n^-1 b^-3 -> 0 polynomially for variation runs (exponent < 1/3) and
    n^-1 b^-4 -> 0 with a remainder exponent gamma for derivative and
    reconstruction runs (exponent < min(1/4, gamma)).
    """

    def __init__(self, mode, gamma=None):
        self.mode = RunMode(mode)
        self.gamma = gamma
        self.failure_message = (
            "Bandwidth exponent {exponent:.4g} is not below {limit:.4g} "
            "required for {mode} runs"
        )

    @property
    def limit(self):
        if self.mode is RunMode.VARIATION:
            return VARIATION_EXPONENT_LIMIT
        if self.gamma is None:
            return DERIVATIVE_EXPONENT_LIMIT
        return min(DERIVATIVE_EXPONENT_LIMIT, self.gamma)

    def __call__(self, exponent):
        logger.debug(f"Validating bandwidth exponent {exponent} for {self.mode.value}")
        if exponent is None or not 0 < exponent < self.limit:
            raise ConfigValidationError(
                self.failure_message.format(
                    exponent=float("nan") if exponent is None else exponent,
                    limit=self.limit,
                    mode=self.mode.value,
                )
            )
        return exponent


def evaluable_bounds(grid_spec, b, kernel):
    """
    Coordinates (x0, y0, x1, y1) of the first and last grid points whose
    kernel windows fit inside the sampled increments of every direction.
    """
    half = window_half_width(grid_spec.n, b, kernel)
    rows, columns = grid_spec.interior_shape
    rows = min(rows, grid_spec.shape[0] - 2)
    columns = min(columns, grid_spec.shape[1] - 2)
    xs, ys = grid_spec.xs, grid_spec.ys
    if columns - 1 - half < half or rows - 1 - half < half:
        return None
    return xs[half], ys[half], xs[columns - 1 - half], ys[rows - 1 - half]


def disk_fits(center, radius, bounds, slack=0.0):
    x0, y0, x1, y1 = bounds
    return (
        center.real - radius >= x0 - slack
        and center.real + radius <= x1 + slack
        and center.imag - radius >= y0 - slack
        and center.imag + radius <= y1 + slack
    )


def validate_config(config):
    """
    Runs every check that can fail before any computation starts.

    :raises ConfigValidationError: naming the first failed check
    """
    try:
        model = config.covariance()
        config.deformation_map()
        n_values = sorted(set(config.sweep.n_values) | {config.grid.n})
        specs = [config.grid_spec(n) for n in n_values]
    except ConfigValidationError:
        raise
    except DeformedFieldException as e:
        raise ConfigValidationError(str(e)) from e
    schedule = config.schedule(model)
    BandwidthValidator(config.mode, model.gamma)(schedule.exponent)
    if config.grid.margin < constants.DEFAULT_MARGIN:
        raise ConfigValidationError(
            f"grid margin {config.grid.margin} must be at least "
            f"{constants.DEFAULT_MARGIN} for second increments"
        )
    sweep = list(config.sweep.n_values)
    if sweep != sorted(sweep) or len(set(sweep)) != len(sweep):
        raise ConfigValidationError(f"sweep n_values {sweep} must be strictly increasing")
    if config.mode is RunMode.VARIATION:
        return config
    solver = config.solver
    center, radius = solver.disk_center, solver.radius
    if radius <= 0:
        raise ConfigValidationError(f"disk radius {radius} must be positive")
    if not disk_fits(center, radius, config.grid.domain):
        raise ConfigValidationError(
            f"disk U(center={center}, r={radius}) is not inside {config.grid.domain}"
        )
    kernel = config.kernel()
    if not kernel.compact:
        raise ConfigValidationError(
            f"{kernel.kind.value} kernel is only allowed in variation runs"
        )
    if solver.exact_injection:
        return config
    smallest = specs[0]
    bounds = evaluable_bounds(smallest, schedule(smallest.n), kernel)
    if bounds is None or not disk_fits(center, radius, bounds, 1.0 / smallest.n):
        raise ConfigValidationError(
            f"disk U(center={center}, r={radius}) is outside the evaluable "
            f"interior {None if bounds is None else tuple(np.round(bounds, 6))} "
            f"at n={smallest.n}, b={schedule(smallest.n):.4g}"
        )
    return config
