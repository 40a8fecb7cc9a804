"""Exception hierarchy shared by every module."""


class SeriesError(Exception):
    """Base class for all errors raised by zseries."""


class ParseError(SeriesError):
    """Malformed expression text.

    ``offset`` is the byte offset (UTF-8) of the offending token.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset


class DomainError(SeriesError):
    """An expression or term was evaluated outside its domain."""


class NegativeMagnitudeError(DomainError):
    pass


class WindowError(SeriesError, ValueError):
    """An index window is too small or starts before the sequence."""


class PreconditionError(SeriesError):
    """A mathematical precondition needed by an operation does not hold."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoCertificateError(SeriesError):
    """No envelope parameter could be certified within the search range."""


class OracleError(SeriesError):
    """The reference oracle could not reach the requested accuracy."""
