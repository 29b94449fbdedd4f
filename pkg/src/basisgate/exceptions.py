"""Exception types raised across the package."""

__all__ = [
    "BasisGateError",
    "NonUnitaryInput",
    "NonHermitianInput",
    "BothZero",
    "DegenerateBoundary",
    "NoIntersection",
    "EmptyInput",
    "IncompleteCoverage",
    "IncompatibleBases",
    "SchemaError",
    "SynthesisFailure",
]


class BasisGateError(Exception):
    """Base class for all package errors."""


class NonUnitaryInput(BasisGateError):
    """A matrix expected to be unitary failed the unitarity check."""


class NonHermitianInput(BasisGateError):
    """A matrix expected to be Hermitian failed the Hermiticity check."""


class BothZero(BasisGateError):
    """Drive ratio is undefined because both pulse angles are zero."""


class DegenerateBoundary(BasisGateError):
    """A speed-limit boundary with zero intercepts cannot be normalized."""


class NoIntersection(BasisGateError):
    """A drive ray failed to intersect the speed-limit boundary."""


class EmptyInput(BasisGateError):
    """An operation that needs at least one point received none."""


class IncompleteCoverage(BasisGateError):
    """A coverage set does not span enough of the Weyl chamber for the query."""


class IncompatibleBases(BasisGateError):
    """Two coverage sets cannot be joined (mismatched conventions or ratio)."""


class SchemaError(BasisGateError):
    """A circuit document violated the expected JSON schema."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SynthesisFailure(BasisGateError):
    """Numerical decomposition failed to reach the required accuracy."""

    def __init__(self, message, best_loss=None):
        self.best_loss = best_loss
        if best_loss is not None:
            message = f"{message} (best achieved loss {best_loss:.3e})"
        super().__init__(message)
