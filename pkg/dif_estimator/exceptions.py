EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class DeformedFieldException(Exception):
    pass


class CovarianceDomainError(DeformedFieldException, ValueError):
    pass


class UnsupportedCovariance(DeformedFieldException, ValueError):
    pass


class NumericalDifferentiationError(DeformedFieldException):
    pass


class DeformationError(DeformedFieldException, ValueError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class GridError(DeformedFieldException, ValueError):
    pass


class OutOfGrid(DeformedFieldException, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SupportClipped(DeformedFieldException):
    pass


class NotPositiveDefinite(DeformedFieldException):
    pass


class CapExceeded(DeformedFieldException):
    pass


class EmbeddingFailure(DeformedFieldException):
    pass


class SamplerPreconditionError(DeformedFieldException, ValueError):
    pass


class VariationDomainError(DeformedFieldException, ValueError):
    pass


class DegenerateEllipse(DeformedFieldException, ValueError):
    pass


class DegenerateField(DeformedFieldException):
    pass


class GeometryError(DeformedFieldException, ValueError):
    pass


class NoConvergence(DeformedFieldException):
    def __init__(self, message, k=None, residual=None):
        super().__init__(message)
        self.k = k
        self.residual = residual


class AliasingError(DeformedFieldException):
    pass


class BeurlingConventionError(DeformedFieldException):
    pass


class RiemannMapInaccurate(DeformedFieldException):
    pass


class InversionFailure(DeformedFieldException):
    pass


class MaskedNodesError(DeformedFieldException):
    pass


class BergmanInputError(DeformedFieldException, ValueError):
    pass


class AlignmentError(DeformedFieldException, ValueError):
    pass


class ConfigValidationError(DeformedFieldException):
    pass


class InvalidBandwidth(ConfigValidationError, ValueError):
    pass


class StageError(DeformedFieldException):
    """A numerical failure inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


ExitCodeSelector = {
    ConfigValidationError: EXIT_CONFIG,
    StageError: EXIT_NUMERICAL,
    DeformedFieldException: EXIT_NUMERICAL,
}


def exit_code_for(exc):
    for exc_class, code in ExitCodeSelector.items():
        if isinstance(exc, exc_class):
            return code
    return EXIT_USAGE
