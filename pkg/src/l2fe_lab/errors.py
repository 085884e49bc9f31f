"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValidationError` so the
CLI can map it to exit code 2; I/O problems surface as plain ``OSError``.
"""


class L2feLabError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(L2feLabError, ValueError):
    """Input violates an operation's preconditions."""


class OutOfRange(ValidationError):
    def __init__(self, index: int, value: float, lo: float, hi: float):
        self.index = index
        self.value = value
        super().__init__(f"coordinate {index} = {value!r} outside [{lo!r}, {hi!r}]")


class DimensionMismatch(ValidationError):
    pass


class InvalidDimension(ValidationError):
    pass


class ZeroNorm(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class InvalidInput(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class RankDeficient(ValidationError):
    pass


class NotInLattice(ValidationError):
    pass


class DegenerateMatrix(ValidationError):
    pass


class SingularSystem(ValidationError):
    pass


class InfeasibleBoost(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class UnsupportedScheme(ValidationError):
    pass


class DuplicateUser(ValidationError):
    pass


class UnknownUser(ValidationError):
    pass
