import abc
import logging

from dif_estimator.grid import FieldSample, make_grid

logger = logging.getLogger(__name__)


class FieldSampler(abc.ABC):
    """
    Draws realizations of Y = Z o f on the points of a grid, where Z is the
    isotropic Gaussian field of ``model``.
    """

    tag = None

    def __init__(self, model, deformation, spec):
        self.model = model
        self.deformation = deformation
        self.spec = spec
        self.points = make_grid(spec)
        self.targets = deformation(self.points)

    @property
    def point_count(self):
        return len(self.points)

    @abc.abstractmethod
    def draw_replicates(self, seed, count):
        """
        Independent realizations from one seed.

        :return: array of shape (count, point_count), points in row-major order
        """
        pass

    def draw_values(self, seed):
        return self.draw_replicates(seed, 1)[0]

    def draw(self, seed):
        values = self.draw_values(seed).reshape(self.spec.shape)
        logger.info(
            f"Drew {self.tag.value} sample of {self.point_count} points "
            f"with seed {seed}"
        )
        return FieldSample(
            grid=self.spec,
            values=values,
            seed=int(seed),
            sampler=self.tag,
            model=self.model,
            deformation=self.deformation,
            provenance={
                "model": self.model.to_dict(),
                "deformation": self.deformation.to_dict(),
            },
        )
