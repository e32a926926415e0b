from dif_estimator.constants import SamplerTag
from dif_estimator.sampling.CirculantInterpolationSampler import (
    CirculantInterpolationSampler,
)
from dif_estimator.sampling.ExactCholeskySampler import ExactCholeskySampler
from dif_estimator.utils import exact_sampler_cap


class Sampler:
    @staticmethod
    def factory(tag, model, deformation, spec, **options):
        tag = SamplerTag(tag)
        if tag is SamplerTag.AUTO:
            cap = options.get("cap") or exact_sampler_cap()
            tag = (
                SamplerTag.EXACT_CHOLESKY
                if spec.size <= cap
                else SamplerTag.CIRCULANT_INTERP
            )
        if tag is SamplerTag.EXACT_CHOLESKY:
            return ExactCholeskySampler(
                model, deformation, spec, cap=options.get("cap")
            )
        return CirculantInterpolationSampler(
            model,
            deformation,
            spec,
            oversample=options.get("oversample", 4),
        )
