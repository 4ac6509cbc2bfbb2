"""Exception hierarchy shared across the package."""


class MonocertError(Exception):
    """Base class for all package-specific failures."""


class GeometryError(MonocertError, ValueError):
    """Invalid path or loop construction."""


class VectorFieldSingularError(MonocertError, ArithmeticError):
    """The vector field cannot be evaluated at the requested state.

    Raised e.g. when the complexified mass matrix of a mechanical system
    degenerates. Integrators treat this as a failed step, not a crash.
    """


class TransportError(MonocertError, RuntimeError):
    """A transport along a path failed in a way the caller must handle."""


class MonodromyError(TransportError):
    """A monodromy computation produced no trustworthy matrix."""


class SheetMismatchError(MonodromyError):
    """The base state did not return to its sheet after the loop.

    Usually the winding count does not equal the branching order of the
    encircled singularity. Carries the offending return residual.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class ConfigError(MonocertError, ValueError):
    """Malformed run configuration; message carries the offending key path."""
