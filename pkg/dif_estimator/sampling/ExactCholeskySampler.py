import logging

import numpy as np
from scipy import linalg
from scipy.spatial import distance

from dif_estimator import constants
from dif_estimator.constants import SamplerTag
from dif_estimator.exceptions import CapExceeded, NotPositiveDefinite
from dif_estimator.sampling.FieldSampler import FieldSampler
from dif_estimator.utils import exact_sampler_cap, philox_generator

logger = logging.getLogger(__name__)


class ExactCholeskySampler(FieldSampler):
    """
    Reference sampler: Y = L w with L the Cholesky factor of the dense
    covariance Sigma_ij = R(|f(t_i) - f(t_j)|).
    """

    tag = SamplerTag.EXACT_CHOLESKY

    def __init__(self, model, deformation, spec, cap=None):
        super().__init__(model, deformation, spec)
        cap = exact_sampler_cap() if cap is None else cap
        if self.point_count > cap:
            raise CapExceeded(
                f"{self.point_count} grid points exceed the dense cap of {cap}; "
                f"use the circulant-interp sampler"
            )
        self._factor = None

    def covariance_matrix(self, jitter=0.0):
        coordinates = np.column_stack([self.targets.real, self.targets.imag])
        size = self.point_count
        sigma = np.empty((size, size))
        block = constants.ASSEMBLY_BLOCK_ROWS
        for start in range(0, size, block):
            stop = min(start + block, size)
            lags = distance.cdist(coordinates[start:stop], coordinates)
            sigma[start:stop] = self.model.evaluate(lags)
        if jitter:
            sigma[np.diag_indices(size)] += jitter
        return sigma

    @property
    def factor(self):
        if self._factor is None:
            self._factor = self._factorize()
        return self._factor

    def _factorize(self):
        r0 = float(self.model.evaluate(0.0))
        for level in constants.JITTER_LEVELS:
            sigma = self.covariance_matrix(jitter=level * r0)
            try:
                factor = linalg.cholesky(
                    sigma, lower=True, overwrite_a=True, check_finite=False
                )
            except linalg.LinAlgError:
                logger.warning(
                    f"Cholesky failed with relative jitter {level:g}, escalating"
                )
                continue
            if level:
                logger.warning(f"Covariance factored with relative jitter {level:g}")
            return factor
        raise NotPositiveDefinite(
            f"covariance of {self.point_count} points is not positive definite "
            f"after jitter {constants.JITTER_LEVELS[-1]:g}"
        )

    def draw_replicates(self, seed, count):
        noise = philox_generator(seed).standard_normal((count, self.point_count))
        return noise @ self.factor.T
