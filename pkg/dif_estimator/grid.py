import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dif_estimator import constants
from dif_estimator.constants import SamplerTag
from dif_estimator.exceptions import GridError, OutOfGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """
    The observation grid: points of spacing 1/n inside the open rectangle
    ``domain`` plus ``margin`` extra layers on the +x/+y sides.
    """

    n: int
    domain: tuple = constants.DEFAULT_DOMAIN
    margin: int = constants.DEFAULT_MARGIN

    def __post_init__(self):
        if int(self.n) != self.n or self.n < constants.MIN_GRID_DENSITY:
            raise GridError(
                f"grid density n={self.n} must be an integer >= "
                f"{constants.MIN_GRID_DENSITY}"
            )
        x0, y0, x1, y1 = self.domain
        if not (x0 < x1 and y0 < y1):
            raise GridError(f"domain {self.domain} is empty")
        if int(self.margin) != self.margin or self.margin < 0:
            raise GridError(f"margin={self.margin} must be a non-negative int")
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "margin", int(self.margin))
        if self.interior_shape[0] < 1 or self.interior_shape[1] < 1:
            raise GridError(f"domain {self.domain} holds no point at n={self.n}")

    def _index_range(self, lo, hi):
        tol = constants.GRID_TOLERANCE
        first = math.floor(self.n * lo + tol) + 1
        last_interior = math.ceil(self.n * hi - tol) - 1
        last = last_interior
        if self.margin:
            last = math.floor(self.n * hi + self.margin + tol)
        return first, last_interior, last

    @property
    def x_range(self):
        return self._index_range(self.domain[0], self.domain[2])

    @property
    def y_range(self):
        return self._index_range(self.domain[1], self.domain[3])

    @property
    def xs(self):
        first, _, last = self.x_range
        return np.arange(first, last + 1) / self.n

    @property
    def ys(self):
        first, _, last = self.y_range
        return np.arange(first, last + 1) / self.n

    @property
    def shape(self):
        """(rows, columns) = (number of y values, number of x values)."""
        return len(self.ys), len(self.xs)

    @property
    def interior_shape(self):
        xf, xl, _ = self.x_range
        yf, yl, _ = self.y_range
        return yl - yf + 1, xl - xf + 1

    @property
    def size(self):
        rows, columns = self.shape
        return rows * columns

    def points(self):
        xs, ys = self.xs, self.ys
        return (xs[np.newaxis, :] + 1j * ys[:, np.newaxis]).ravel()

    def to_dict(self):
        return {"n": self.n, "domain": list(self.domain), "margin": self.margin}


def make_grid(spec, bandwidth=None):
    """
    Row-major (y outer, x inner) complex coordinates of the grid points,
    margin layers included.
    """
    if bandwidth is not None and 2 * bandwidth * spec.n < 4:
        logger.warning(
            f"Grid n={spec.n} leaves fewer than 4 points across the kernel "
            f"window at b={bandwidth:.3g}"
        )
    return spec.points()


@dataclass(frozen=True, eq=False)
class FieldSample:
    grid: GridSpec
    values: np.ndarray
    seed: int
    sampler: SamplerTag
    model: Optional[object] = None
    deformation: Optional[object] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridError(
                f"values shape {values.shape} does not match grid "
                f"{self.grid.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return self.grid.n

    @property
    def xs(self):
        return self.grid.xs

    @property
    def ys(self):
        return self.grid.ys

    @property
    def interior_values(self):
        rows, columns = self.grid.interior_shape
        return self.values[:rows, :columns]

    def column_of(self, x):
        return self._index(x, self.grid.x_range[0], self.values.shape[1], "x")

    def row_of(self, y):
        return self._index(y, self.grid.y_range[0], self.values.shape[0], "y")

    def _index(self, coordinate, first, count, axis):
        scaled = coordinate * self.n
        index = int(round(scaled))
        if abs(scaled - index) > 1e-6 or not first <= index < first + count:
            raise OutOfGrid(f"{axis}={coordinate!r} is not a sampled coordinate")
        return index - first

    def value_at(self, x, y):
        return float(self.values[self.row_of(y), self.column_of(x)])
