class PropcalcError(Exception):
    """Base class for every error raised by propcalc."""


class InvalidLabel(PropcalcError):
    def __init__(self, label: str, reason: str):
        self.label = label
        self.reason = reason
        super().__init__(f"invalid basis label {label!r}: {reason}")


class ShapeMismatch(PropcalcError):
    pass


class SquareZeroViolation(PropcalcError):
    def __init__(self, degree: int, witness: dict | None = None):
        self.degree = degree
        self.witness = witness or {}
        super().__init__(f"d∘d is nonzero on degree {degree}")


class NotAChainMap(PropcalcError):
    def __init__(self, label: str, message: str = ""):
        self.label = label
        super().__init__(message or f"map does not commute with differentials on {label!r}")


class NotInSubspace(PropcalcError):
    pass


class ClosureViolation(PropcalcError):
    """A structure map leaves a pullback or equalizer carrier."""


class TruncationExceeded(PropcalcError):
    def __init__(self, biarity: tuple[int, int], bound: int):
        self.biarity = biarity
        self.bound = bound
        super().__init__(f"biarity {biarity} exceeds truncation bound {bound}")


class ArityMismatch(PropcalcError):
    pass


class NoSolution(PropcalcError):
    def __init__(self, generator: str, witness: dict):
        self.generator = generator
        self.witness = witness
        super().__init__(f"no lift exists for generator {generator!r}")


class InconsistentPresentation(PropcalcError):
    def __init__(self, conflicts: list[dict]):
        self.conflicts = conflicts
        super().__init__(f"presentation is inconsistent ({len(conflicts)} conflicts)")


class FactorizationFailure(PropcalcError):
    pass


class ZigzagViolation(PropcalcError):
    def __init__(self, generator: str, arrow: str, violations: list[dict] | None = None):
        self.generator = generator
        self.arrow = arrow
        self.violations = violations or []
        super().__init__(f"induced operation of {generator!r} does not commute with {arrow}")


class CompatibilityFailure(PropcalcError):
    pass


class ParseError(PropcalcError):
    def __init__(self, path: str, field: str, message: str, line: int | None = None):
        self.path = path
        self.field = field
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {field}: {message}")
