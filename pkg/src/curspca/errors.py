"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class InfeasibleError(ParameterError):
    """The requested selection cannot be realized (e.g. too few nonzero scores)."""


class DegenerateError(ValueError):
    """A quantity needed by an update is undefined (zero column, zero matrix)."""


class ParseError(ValueError):
    """Malformed matrix input. ``row`` and ``col`` are 1-based when known."""

    def __init__(self, message, row=None, col=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if col is not None:
            loc.append(f"column {col}")
        if loc:
            message = f"{message} (at {', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.col = col
