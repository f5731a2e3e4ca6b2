"""Exception and warning types raised across the package."""


class LoopCalcError(Exception):
    """Base class for all package errors."""


class InvalidGraph(LoopCalcError, ValueError):
    """Structural problem in a graph specification."""


class DegreeTooHigh(InvalidGraph):
    pass


class NonPlanarEmbedding(InvalidGraph):
    pass


class MalformedTable(InvalidGraph):
    pass


class DanglingEdge(InvalidGraph):
    pass


class InconsistentRotation(InvalidGraph):
    pass


class TooLarge(LoopCalcError):
    """Input exceeds the cap of an exhaustive routine."""


class ZeroPartition(LoopCalcError, ArithmeticError):
    pass


class NumericalUnderflow(LoopCalcError, ArithmeticError):
    pass


class DomainError(LoopCalcError, ValueError):
    pass


class OddPsi(LoopCalcError, ValueError):
    pass


class PsiNotTriplet(LoopCalcError, ValueError):
    pass


class NotSkew(LoopCalcError, ValueError):
    pass


class OddDimension(LoopCalcError, ValueError):
    pass


class ZeroDenominator(LoopCalcError, ZeroDivisionError):
    pass


class DegenerateBeliefWarning(RuntimeWarning):
    """An edge mean hit the clamp |m| <= 1 - 1e-12."""


class NonPositiveSumWarning(RuntimeWarning):
    """A partial loop or Pfaffian sum was <= 0, so its log is undefined."""
