from enum import Enum


class CovarianceKind(Enum):
    POWERED_EXPONENTIAL = "powered-exponential"
    MATERN = "matern"

    @classmethod
    def choices(cls):
        return ((kind.name, kind.value) for kind in CovarianceKind)


class DeformationKind(Enum):
    IDENTITY = "identity"
    AFFINE = "affine"
    QUADRATIC = "quadratic"
    CONJUGATE_QUADRATIC = "conjugate_quadratic"

    @classmethod
    def choices(cls):
        return ((kind.name, kind.value) for kind in DeformationKind)


class Smoothness(Enum):
    C2 = "C2"
    C3 = "C3"
    SMOOTH = "smooth"


class SamplerTag(Enum):
    EXACT_CHOLESKY = "exact-cholesky"
    CIRCULANT_INTERP = "circulant-interp"
    AUTO = "auto"

    @classmethod
    def choices(cls):
        return ((tag.name, tag.value) for tag in SamplerTag)


class KernelKind(Enum):
    TRIWEIGHT = "triweight"
    GAUSSIAN = "gaussian"

    @classmethod
    def choices(cls):
        return ((kind.name, kind.value) for kind in KernelKind)


class RunMode(Enum):
    """What a run estimates; decides which bandwidth contract applies."""

    VARIATION = "variation"
    DERIVATIVE = "derivative"
    RECONSTRUCTION = "reconstruction"


# Second-increment directions h, keyed by the name used in dumps and configs.
DIRECTIONS = {"x": (1, 0), "y": (0, 1), "diagonal": (1, 1)}
DIFFERENCE_FILTER = (1.0, -2.0, 1.0)

# Remainder exponents gamma shipped per model (strictly inside the provable range).
GAMMA_OFFSET = 0.1
GAMMA_FRACTION = 0.5

DEFAULT_DOMAIN = (0.0, 0.0, 1.0, 1.0)
DEFAULT_MARGIN = 2
MIN_GRID_DENSITY = 4
GRID_TOLERANCE = 1e-9

EXACT_SAMPLER_CAP = 12000
JITTER_LEVELS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)
ASSEMBLY_BLOCK_ROWS = 1024
DEFAULT_OVERSAMPLE = 4
EMBEDDING_RETRIES = 3
EMBEDDING_NEGATIVE_TOLERANCE = 1e-10
FAST_SAMPLER_BATCH = 64

R3_GRID_POINTS = 200
R3_VIOLATION_SLACK = 1.05
RICHARDSON_RELATIVE_STEP = 0.1

BANDWIDTH_CONSTANT = 0.45
BANDWIDTH_EXPONENT_CAP = 0.22
BANDWIDTH_GAMMA_FRACTION = 0.8
GAUSSIAN_EFFECTIVE_RADIUS = 6.0

MU_CLAMP = 1e-3
DEGENERATE_FRACTION_LIMIT = 0.10

DEFAULT_DISK_CENTER = 0.5 + 0.5j
DEFAULT_DISK_RADIUS = 0.3
BOX_FACTOR = 8.0
SOLVER_RESOLUTION = 512
OUTER_RADIUS_FACTOR = 1.5
BELTRAMI_TOLERANCE = 1e-10
BELTRAMI_MAX_ITER = 500
CONTRACTION_SLACK = 0.05
ALIASING_THRESHOLD = 0.12
BEURLING_SELF_TEST_TOLERANCE = 1e-6

RIEMANN_DEGREE = 24
RIEMANN_CONDITION_LIMIT = 1e12
BOUNDARY_TOLERANCE = 1e-2
BOUNDARY_SAMPLES = 512
INVERSE_MARGIN = 0.05
INVERSION_TOLERANCE = 1e-10
NEWTON_MAX_ITER = 50
INVERSE_TABLE_RADII = 48
INVERSE_TABLE_ANGLES = 128
FORWARD_TABLE_POINTS = 65

BERGMAN_DEGREE = 24
QUADRATURE_RADIAL = 64
QUADRATURE_ANGULAR = 256
SEGMENT_NODES = 32
DATA_RADIUS = 1.0 - INVERSE_MARGIN
EVAL_FRACTION = 0.9
METRIC_FRACTION = 0.5
MASKED_NODE_LIMIT = 0.05

FLOAT_FORMAT = "{:.17g}"
