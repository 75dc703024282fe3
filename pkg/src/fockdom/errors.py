"""Exception hierarchy. Every domain error derives from :class:`FockdomError`."""


class FockdomError(Exception):
    """Base class for operational errors raised by the toolkit."""


class NonIntegrableSingularity(FockdomError):
    pass


class NegativeLaplacian(FockdomError):
    pass


class MassNeverReachesOne(FockdomError):
    pass


class DivisionByZeroMass(FockdomError):
    pass


class InsufficientSamples(FockdomError):
    pass


class PairOutsideDisk(FockdomError):
    pass


class DomainTooSmall(FockdomError):
    pass


class EmptyGrid(FockdomError):
    pass


class ExponentTooSmall(FockdomError):
    pass


class IllConditionedFit(FockdomError):
    pass


class InvalidRadius(FockdomError):
    pass


class MeasureTargetInfeasible(FockdomError):
    pass


class HypothesisUnsatisfied(FockdomError):
    pass


class NonRadialWeight(FockdomError):
    pass


class QuadratureUnderResolved(FockdomError):
    pass


class CoveringWeightMismatch(FockdomError):
    pass


class InvalidLevel(FockdomError):
    pass


class ConfigParseError(FockdomError):
    """Bad configuration; ``field`` and ``line`` locate the problem when known."""

    def __init__(self, message, field=None, line=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        prefix = f"[{', '.join(loc)}] " if loc else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line


class InvariantViolation(FockdomError):
    """An inequality that should hold empirically failed."""
