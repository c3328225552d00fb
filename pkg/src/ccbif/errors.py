"""Exception and warning types raised across the package."""


class CCBifError(Exception):
    """Base class for all errors raised by ccbif."""


class CollisionError(CCBifError, ValueError):
    """Two bodies are closer than the collision floor."""


class DegenerateInertia(CCBifError, ValueError):
    pass


class ZeroConfiguration(CCBifError, ValueError):
    pass


class NotSymmetric(CCBifError, ValueError):
    pass


class NotCritical(CCBifError, ValueError):
    """The configuration is not a critical point of the augmented potential."""


class OutOfRange(CCBifError, ValueError):
    pass


class InvalidMasses(CCBifError, ValueError):
    pass


class MassSolveFailed(CCBifError, ValueError):
    pass


class AsymmetricShape(CCBifError, ValueError):
    pass


class ParseError(CCBifError, ValueError):
    pass


class NotCentral(CCBifError, ValueError):
    def __init__(self, row, residual, message=None):
        self.row = row
        self.residual = residual
        super().__init__(message or f"row {row}: not a central configuration "
                                    f"(residual {residual:.3e})")


class DegenerateOrbit(CCBifError, ValueError):
    """The Hessian kernel is larger than the orbit tangent line."""


class EvaluationError(CCBifError, RuntimeError):
    def __init__(self, parameter, cause):
        self.parameter = parameter
        self.cause = cause
        super().__init__(f"evaluation failed at parameter {parameter!r}: {cause}")


class GridTooCoarse(UserWarning):
    """Adjacent scan points differ by an odd Morse-index jump of 3 or more."""
