"""
Experiment configuration: a TOML document with the sections [model],
[deformation], [grid], [bandwidth], [solver], [sweep] and [output].
Every key is optional; unknown sections and keys are rejected.
"""
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import toml

from dif_estimator import constants
from dif_estimator.constants import KernelKind, RunMode, SamplerTag
from dif_estimator.covariance import make_covariance
from dif_estimator.deformations import make_deformation
from dif_estimator.exceptions import ConfigValidationError
from dif_estimator.grid import GridSpec
from dif_estimator.kernels import Kernel
from dif_estimator.qvar import BandwidthSchedule

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240917


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "powered-exponential"
    scale: float = 1.0
    alpha: float = 1.0
    nu: float = 0.5
    range: float = 1.0
    variance: float = 1.0
    normalize: bool = True

    def spec(self):
        if self.kind == "matern":
            keys = ("kind", "nu", "range", "variance", "normalize")
        else:
            keys = ("kind", "scale", "alpha", "variance", "normalize")
        return {key: getattr(self, key) for key in keys}

    def build(self):
        return make_covariance(self.spec())


@dataclass(frozen=True)
class DeformationConfig:
    kind: str = "identity"
    matrix: Optional[tuple] = None
    offset: Optional[tuple] = None
    epsilon: Optional[float] = None
    rotation: float = 0.0
    shift: Optional[tuple] = None

    def spec(self):
        return {
            key: value
            for key, value in asdict(self).items()
            if value is not None and not (key == "rotation" and not value)
        }

    def build(self, domain=None):
        return make_deformation(self.spec(), domain)


@dataclass(frozen=True)
class GridConfig:
    n: int = 96
    domain: tuple = constants.DEFAULT_DOMAIN
    margin: int = constants.DEFAULT_MARGIN
    sampler: str = SamplerTag.AUTO.value
    oversample: int = constants.DEFAULT_OVERSAMPLE
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class BandwidthConfig:
    constant: float = constants.BANDWIDTH_CONSTANT
    # None: min(0.8 gamma, 0.22) from the model's remainder exponent
    exponent: Optional[float] = None
    kernel: str = KernelKind.TRIWEIGHT.value
    mode: str = RunMode.RECONSTRUCTION.value


@dataclass(frozen=True)
class SolverConfig:
    center: tuple = (0.5, 0.5)
    radius: float = constants.DEFAULT_DISK_RADIUS
    outer_radius_factor: float = constants.OUTER_RADIUS_FACTOR
    box_factor: float = constants.BOX_FACTOR
    resolution: int = constants.SOLVER_RESOLUTION
    tolerance: float = constants.BELTRAMI_TOLERANCE
    max_iterations: int = constants.BELTRAMI_MAX_ITER
    riemann_degree: int = constants.RIEMANN_DEGREE
    bergman_degree: int = constants.BERGMAN_DEGREE
    quadrature_radial: int = constants.QUADRATURE_RADIAL
    quadrature_angular: int = constants.QUADRATURE_ANGULAR
    segment_nodes: int = constants.SEGMENT_NODES
    boundary_tolerance: float = constants.BOUNDARY_TOLERANCE
    inverse_margin: float = constants.INVERSE_MARGIN
    eval_fraction: float = constants.EVAL_FRACTION
    metric_fraction: float = constants.METRIC_FRACTION
    mu_clamp: float = constants.MU_CLAMP
    exact_injection: bool = False

    @property
    def disk_center(self):
        return complex(self.center[0], self.center[1])


@dataclass(frozen=True)
class SweepConfig:
    n_values: tuple = (64, 96)
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "output"


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    deformation: DeformationConfig = field(default_factory=DeformationConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    bandwidth: BandwidthConfig = field(default_factory=BandwidthConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def mode(self):
        return RunMode(self.bandwidth.mode)

    def covariance(self):
        return self.model.build()

    def deformation_map(self):
        return self.deformation.build(self.grid.domain)

    def grid_spec(self, n=None):
        return GridSpec(
            n=self.grid.n if n is None else n,
            domain=self.grid.domain,
            margin=self.grid.margin,
        )

    def kernel(self):
        return Kernel.factory(self.bandwidth.kernel)

    def schedule(self, model=None):
        if self.bandwidth.exponent is not None:
            return BandwidthSchedule(self.bandwidth.constant, self.bandwidth.exponent)
        model = model or self.covariance()
        return BandwidthSchedule.default_for(model.gamma, self.bandwidth.constant)

    def bandwidth_for(self, n, model=None):
        return self.schedule(model)(n)

    def to_dict(self):
        return asdict(self)


SECTIONS = {
    "model": ModelConfig,
    "deformation": DeformationConfig,
    "grid": GridConfig,
    "bandwidth": BandwidthConfig,
    "solver": SolverConfig,
    "sweep": SweepConfig,
    "output": OutputConfig,
}


def _coerce(value):
    if isinstance(value, list):
        return tuple(_coerce(item) for item in value)
    return value


def _section(name, values):
    section_class = SECTIONS[name]
    if not isinstance(values, dict):
        raise ConfigValidationError(f"[{name}] must be a table of key = value lines")
    known = {f.name for f in fields(section_class)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigValidationError(f"unknown keys in [{name}]: {', '.join(unknown)}")
    return section_class(**{key: _coerce(value) for key, value in values.items()})


def config_from_dict(data):
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigValidationError(f"unknown sections: {', '.join(unknown)}")
    config = ExperimentConfig(
        **{name: _section(name, values) for name, values in data.items()}
    )
    _check_choices(config)
    return config


def _check_choices(config):
    choices = (
        ("bandwidth.kernel", config.bandwidth.kernel, KernelKind),
        ("bandwidth.mode", config.bandwidth.mode, RunMode),
        ("grid.sampler", config.grid.sampler, SamplerTag),
    )
    for key, value, enum in choices:
        try:
            enum(value)
        except ValueError:
            allowed = ", ".join(member.value for member in enum)
            raise ConfigValidationError(f"{key} = {value!r}; expected one of {allowed}")


def parse_config(text):
    try:
        data = toml.loads(text)
    except toml.TomlDecodeError as e:
        raise ConfigValidationError(f"malformed configuration: {e}") from e
    return config_from_dict(data)


def load_config(path):
    try:
        with open(path) as config_file:
            text = config_file.read()
    except OSError as e:
        raise ConfigValidationError(f"cannot read configuration {path}: {e}") from e
    config = parse_config(text)
    logger.debug(f"Loaded configuration from {path}")
    return config


def dump_config(config):
    return toml.dumps(
        {
            name: {
                key: list(value) if isinstance(value, tuple) else value
                for key, value in asdict(getattr(config, name)).items()
                if value is not None
            }
            for name in SECTIONS
        }
    )
