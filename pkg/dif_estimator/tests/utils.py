import numpy as np

from dif_estimator.config import (
    DeformationConfig,
    ExperimentConfig,
    GridConfig,
    SolverConfig,
)
from dif_estimator.constants import SamplerTag
from dif_estimator.covariance import powered_exponential
from dif_estimator.deformations import affine, identity
from dif_estimator.dilatation import DilatationField
from dif_estimator.grid import FieldSample, GridSpec


def create_model(alpha=1.0):
    return powered_exponential(alpha=alpha).normalized()


def create_stretch():
    """f(x, y) = (2x, y): mu = 1/3, tau = log 1.5 everywhere."""
    return affine([[2.0, 0.0], [0.0, 1.0]])


def create_sample(n=32, values=None, deformation=None, seed=1):
    grid = GridSpec(n)
    if values is None:
        values = np.zeros(grid.shape)
    elif callable(values):
        points = grid.points().reshape(grid.shape)
        values = values(points)
    deformation = deformation or identity()
    return FieldSample(
        grid=grid,
        values=values,
        seed=seed,
        sampler=SamplerTag.EXACT_CHOLESKY,
        model=create_model(),
        deformation=deformation,
        provenance={
            "model": create_model().to_dict(),
            "deformation": deformation.to_dict(),
        },
    )


def create_constant_dilatation(mu=0.0, tau=0.0, region=(0.1, 0.1, 0.9, 0.9), count=41):
    x0, y0, x1, y1 = region
    xs = np.linspace(x0, x1, count)
    ys = np.linspace(y0, y1, count)
    shape = (count, count)
    return DilatationField(
        xs=xs,
        ys=ys,
        mu=np.full(shape, mu, dtype=complex),
        tau=np.full(shape, tau, dtype=float),
        mask=np.zeros(shape, dtype=bool),
        source="exact",
    )


def create_solver_config(**overrides):
    """Solver settings light enough for unit tests."""
    settings = dict(resolution=128, quadrature_radial=48, quadrature_angular=192)
    settings.update(overrides)
    return SolverConfig(**settings)


def create_exact_config(deformation_kind="identity", **deformation):
    return ExperimentConfig(
        deformation=DeformationConfig(kind=deformation_kind, **deformation),
        grid=GridConfig(n=32),
        solver=create_solver_config(exact_injection=True),
    )


def disk_lattice(center, radius, count=21):
    offsets = np.linspace(-radius, radius, count)
    lattice = center + offsets[np.newaxis, :] + 1j * offsets[:, np.newaxis]
    return lattice[np.abs(lattice - center) <= radius]
