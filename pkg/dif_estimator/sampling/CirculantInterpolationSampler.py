import logging
import math

import numpy as np
from scipy import fft
from scipy.interpolate import RegularGridInterpolator

from dif_estimator import constants
from dif_estimator.constants import SamplerTag
from dif_estimator.exceptions import (
    DeformationError,
    EmbeddingFailure,
    SamplerPreconditionError,
)
from dif_estimator.sampling.FieldSampler import FieldSampler
from dif_estimator.utils import philox_generator

logger = logging.getLogger(__name__)


class CirculantInterpolationSampler(FieldSampler):
    """
    Large-grid sampler: Z is simulated exactly on a lattice covering f(grid)
    by circulant embedding, then read off at f(t) by bilinear interpolation.

    The lattice spacing is c1/(q n) with c1 the smallest singular value of
    J_f over the grid. Interpolation lowers the variance between lattice
    nodes by O((q n)^-alpha), so the sampler is an approximation.
    """

    tag = SamplerTag.CIRCULANT_INTERP

    def __init__(
        self,
        model,
        deformation,
        spec,
        oversample=constants.DEFAULT_OVERSAMPLE,
        max_retries=constants.EMBEDDING_RETRIES,
    ):
        if oversample < 2:
            raise SamplerPreconditionError(
                f"oversample factor q={oversample} must be >= 2"
            )
        super().__init__(model, deformation, spec)
        self.oversample = oversample
        low, _ = deformation.singular_values(self.points)
        c1 = float(low.min())
        if c1 <= 0:
            raise DeformationError("deformation is singular on the grid")
        self.spacing = c1 / (oversample * spec.n)
        re, im = self.targets.real, self.targets.imag
        self.origin = complex(re.min() - self.spacing, im.min() - self.spacing)
        self.lattice_shape = (
            math.ceil((im.max() - self.origin.imag) / self.spacing) + 2,
            math.ceil((re.max() - self.origin.real) / self.spacing) + 2,
        )
        self.eigenvalues = self._embed(max_retries)

    def _embed(self, max_retries):
        rows, columns = self.lattice_shape
        padding = 2
        for attempt in range(max_retries):
            shape = (fft.next_fast_len(padding * rows), fft.next_fast_len(padding * columns))
            lag_y = np.arange(shape[0])
            lag_y = self.spacing * np.minimum(lag_y, shape[0] - lag_y)
            lag_x = np.arange(shape[1])
            lag_x = self.spacing * np.minimum(lag_x, shape[1] - lag_x)
            base = self.model.evaluate(np.hypot(lag_y[:, np.newaxis], lag_x[np.newaxis, :]))
            eigenvalues = np.real(np.fft.fft2(base))
            worst = eigenvalues.min()
            if worst >= -constants.EMBEDDING_NEGATIVE_TOLERANCE * eigenvalues.max():
                logger.debug(
                    f"Circulant embedding {shape} accepted after {attempt + 1} tries"
                )
                return np.clip(eigenvalues, 0.0, None)
            logger.warning(
                f"Embedding {shape} has negative eigenvalue {worst:.3g}, "
                f"doubling padding"
            )
            padding *= 2
        raise EmbeddingFailure(
            f"circulant embedding not nonnegative-definite after {max_retries} "
            f"paddings"
        )

    @property
    def lattice_axes(self):
        rows, columns = self.lattice_shape
        return (
            self.origin.imag + self.spacing * np.arange(rows),
            self.origin.real + self.spacing * np.arange(columns),
        )

    def _lattice_fields(self, generator, count):
        shape = self.eigenvalues.shape
        amplitude = np.sqrt(self.eigenvalues / (shape[0] * shape[1]))
        noise = generator.standard_normal((count,) + shape) + 1j * generator.standard_normal(
            (count,) + shape
        )
        fields = np.fft.fft2(amplitude * noise, axes=(-2, -1)).real
        rows, columns = self.lattice_shape
        return fields[:, :rows, :columns]

    def draw_replicates(self, seed, count):
        generator = philox_generator(seed)
        chunk = max(1, min(constants.FAST_SAMPLER_BATCH, 2 ** 24 // self.eigenvalues.size))
        where = np.column_stack([self.targets.imag, self.targets.real])
        draws = []
        for start in range(0, count, chunk):
            batch = min(chunk, count - start)
            fields = self._lattice_fields(generator, batch)
            interpolator = RegularGridInterpolator(
                self.lattice_axes, np.moveaxis(fields, 0, -1), method="linear"
            )
            draws.append(interpolator(where).T)
        return np.concatenate(draws, axis=0)
