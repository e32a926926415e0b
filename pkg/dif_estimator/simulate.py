import logging

from dif_estimator import constants
from dif_estimator.constants import SamplerTag
from dif_estimator.sampling.SamplerFactory import Sampler

logger = logging.getLogger(__name__)


def sample_exact(model, deformation, spec, seed, cap=None):
    """
    One exact draw of Y = Z o f on the grid of ``spec``.

    :raises CapExceeded: when the grid has more points than ``cap``
    :raises NotPositiveDefinite: when jitter escalation is exhausted
    """
    return Sampler.factory(
        SamplerTag.EXACT_CHOLESKY, model, deformation, spec, cap=cap
    ).draw(seed)


def sample_fast(
    model, deformation, spec, seed, oversample=constants.DEFAULT_OVERSAMPLE
):
    return Sampler.factory(
        SamplerTag.CIRCULANT_INTERP,
        model,
        deformation,
        spec,
        oversample=oversample,
    ).draw(seed)


def sample_field(
    model,
    deformation,
    spec,
    seed,
    sampler=SamplerTag.AUTO,
    oversample=constants.DEFAULT_OVERSAMPLE,
    cap=None,
):
    return Sampler.factory(
        sampler, model, deformation, spec, oversample=oversample, cap=cap
    ).draw(seed)
