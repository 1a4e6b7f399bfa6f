"""Exception hierarchy shared by every module."""


class RunOrderError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 3)."""


class AlphabetMismatchError(RunOrderError):
    pass


class InvalidInputError(RunOrderError, ValueError):
    pass


class MalformedBwtError(RunOrderError, ValueError):
    pass


class LimitExceededError(RunOrderError):
    """Raised when an exhaustive search would exceed its configured bound."""


class PreconditionError(RunOrderError, ValueError):
    pass


class UnsupportedShapeError(RunOrderError):
    pass


class InvariantViolation(RunOrderError, AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""
