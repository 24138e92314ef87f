"""Exception types raised by platehom."""


class PlateHomError(Exception):
    """Base class for all library errors."""


class EmptyCoefficients(PlateHomError, ValueError):
    pass


class EllipticityViolation(PlateHomError, ValueError):
    pass


class IrrationalDirection(PlateHomError, ValueError):
    pass


class DetDegenerate(PlateHomError, ValueError):
    """The chart weight 1 - s*kappa drops below the admissible bound."""

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class ClassificationMismatch(PlateHomError, ValueError):
    pass


class SelfOverlap(PlateHomError, ValueError):
    pass


class NonContiguousPieces(PlateHomError, ValueError):
    pass


class OutOfRange(PlateHomError, ValueError):
    pass


class NewtonDivergence(PlateHomError, RuntimeError):
    pass


class QuadratureNotConverged(PlateHomError, RuntimeError):
    pass


class ChartMismatch(PlateHomError, ValueError):
    pass


class ConfigError(PlateHomError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
