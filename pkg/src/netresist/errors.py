"""Exception types shared across the package."""


class NetResistError(Exception):
    """Base class for all package errors."""


class InputError(NetResistError, ValueError):
    """Malformed or inconsistent input (bad ids, overlapping sets, size mismatch)."""


class DomainError(NetResistError, ValueError):
    """Input is well formed but outside the mathematical domain of the operation."""


class CapacityError(NetResistError, RuntimeError):
    """Exhaustive computation requested above its configured size limit."""


class RetryableError(NetResistError, RuntimeError):
    """A randomized procedure ran out of attempts; retrying with another seed may work."""


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
