"""Exception hierarchy shared across the toolkit."""


class FailsafeError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolationError(FailsafeError):
    """An operation was called with arguments violating its precondition
    (mismatched truncation orders, incompatible dimensions, bad shifts)."""


class NotAUnitError(FailsafeError):
    """Inversion of a power series whose constant term is zero."""


class NotInvertibleError(FailsafeError):
    """Matrix inversion where the constant-term matrix is singular."""


class DetNotUnitError(FailsafeError):
    """Determinant elimination found no unit pivot; the determinant has a
    zero constant term and such inputs are out of scope."""


class InvalidQueryError(FailsafeError):
    """A failure query referencing a nonexistent edge, or a vertex failure
    equal to one of the query endpoints."""


class GraphParseError(FailsafeError):
    """Malformed graph or query file. Carries a 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphValidationError(FailsafeError):
    """Structurally valid input describing an illegal graph (weight out of
    range, duplicate edge, self-loop, vertex out of range)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnreachableError(FailsafeError):
    """Path extraction between vertices with no connecting path."""
