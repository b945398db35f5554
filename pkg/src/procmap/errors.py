"""Exception types raised across the package."""


class ProcmapError(Exception):
    """Base class for every error raised by procmap."""


class BudgetViolation(ProcmapError):
    """An insertion was attempted on a full process map."""


class DanglingEndpoint(ProcmapError):
    """An arc operation referenced an activity that is not in the map."""


class NotFound(ProcmapError, KeyError):
    pass


class EmptyMap(ProcmapError):
    pass


class EmptyStore(ProcmapError):
    pass


class MalformedEvent(ProcmapError, ValueError):
    pass


class ZeroTotalFrequency(ProcmapError, ValueError):
    """The reference graph has no relations, so accuracy is undefined."""


class UnknownTechnique(ProcmapError, ValueError):
    pass


class ParseError(ProcmapError, ValueError):
    """A log line could not be parsed.

    ``line`` is the 1-based line number (``None`` when parsing a bare string)
    and ``column`` the 1-based field index that failed, if known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
