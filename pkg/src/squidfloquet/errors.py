"""Exception hierarchy.

Every error raised by the package derives from :class:`SquidFloquetError`.
Parameter and input problems derive from :class:`ValidationError` as well,
solver breakdowns from :class:`SolverError`; the command line maps the two
families onto different exit codes.
"""


class SquidFloquetError(Exception):
    """Base class for all package errors."""


class ValidationError(SquidFloquetError, ValueError):
    """Invalid parameters or input."""


class SolverError(SquidFloquetError, ArithmeticError):
    """A numerical solve could not produce a trustworthy answer."""


# spectral core
class ZeroFrequencyOnGrid(ValidationError):
    pass


class NonPositiveBase(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class SingularSystem(SolverError):
    pass


# elements
class FluxBeyondHalfQuantum(ValidationError):
    pass


class UnsupportedPumpCount(ValidationError):
    pass


class NonPositiveResistance(ValidationError):
    pass


class NonPositiveJ(ValidationError):
    pass


class IncommensuratePump(ValidationError):
    pass


# networks
class DanglingNode(ValidationError):
    pass


class NegativeAbsorbedCapacitance(ValidationError):
    pass


# time-domain oracle
class UnsupportedElement(ValidationError):
    pass


class NoSteadyState(SolverError):
    pass


class IllConditionedProjection(SolverError):
    pass


# optimisation
class NoImprovement(SolverError):
    pass


# netlists
class NetlistError(ValidationError):
    """Netlist problem tied to a source line."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class UnknownDirective(NetlistError):
    pass


class DuplicateName(NetlistError):
    pass


class UnresolvedNodeRef(NetlistError):
    pass


class MalformedNumber(NetlistError):
    pass
