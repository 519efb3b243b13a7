"""Exception hierarchy for the waitnet package."""


class WaitnetError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(WaitnetError):
    """A net, marking, or transition violates a structural invariant."""


class NotFirableError(WaitnetError):
    """The requested transition cannot fire from the given marking or class."""


class NotFullyEnabledError(NotFirableError):
    """A discrete move was attempted on a transition missing control tokens."""


class ClockOutOfIntervalError(NotFirableError):
    """A discrete move was attempted outside the transition's firing window."""


class UrgencyViolationError(WaitnetError):
    """A timed move would push a fully enabled clock past its upper bound."""


class UnknownVariableError(WaitnetError):
    """A constraint refers to a variable absent from the domain."""


class UnsatisfiableError(WaitnetError):
    """The constraint system has an empty solution set (negative cycle)."""


class BadBoundIndexError(WaitnetError):
    """A successor was requested for a ladder interval that does not exist."""


class BoundExceededError(WaitnetError):
    """A place accumulated more tokens than the exploration limit allows."""

    def __init__(self, place: str, count: int, limit: int):
        super().__init__(f"place {place!r} holds {count} tokens (limit {limit})")
        self.place = place
        self.count = count
        self.limit = limit


class ClassBudgetExceededError(WaitnetError):
    """The exploration produced more state classes than the configured budget."""

    def __init__(self, limit: int):
        super().__init__(f"state class budget exceeded (limit {limit})")
        self.limit = limit


class RealizationFailedError(WaitnetError):
    """No concrete run realizes a symbolic path; indicates a construction bug."""


class SearchBudgetExceededError(WaitnetError):
    """Silent-move search exceeded its step budget before reaching a verdict."""


class NetSyntaxError(WaitnetError):
    """Malformed text in a net description file."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class NetSemanticError(WaitnetError):
    """Well-formed text describing an ill-formed net."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message
