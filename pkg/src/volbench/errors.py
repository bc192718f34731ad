"""Exception hierarchy shared by every volbench module."""


class VolbenchError(Exception):
    """Base class for all toolkit errors."""


class CircuitParseError(VolbenchError, ValueError):
    """Raised when circuit JSON text violates the schema.

    ``path`` locates the offending element, e.g. ``central[2][0].targets``.
    """

    def __init__(self, message, path=""):
        self.path = path
        self.detail = message
        super().__init__(f"{path}: {message}" if path else message)

    def __reduce__(self):
        return type(self), (self.detail, self.path)


class InvalidParameter(VolbenchError, ValueError):
    pass


class UnsupportedGate(VolbenchError):
    """A gate kind is outside the set an operation can handle."""


class ShapeUnsupported(VolbenchError, ValueError):
    pass


class NonUnitary(VolbenchError, ValueError):
    pass


class NonNativeGate(VolbenchError):
    pass


class ConnectivityViolation(VolbenchError):
    pass


class ParallelismViolation(VolbenchError):
    pass


class NonGeneratingGateSet(VolbenchError):
    pass


class WidthCapExceeded(VolbenchError):
    pass


class UnexpandableSubroutine(VolbenchError):
    pass


class MissingIdealOutcome(VolbenchError):
    pass


class UniformOutcome(VolbenchError):
    """Heavy outputs are undefined when every outcome is equally likely."""


class ZeroProbabilityOutcome(VolbenchError):
    pass


class EmptyEnsemble(VolbenchError, ValueError):
    pass


class EmptyGrid(VolbenchError, ValueError):
    pass


class LatticeMismatch(VolbenchError, ValueError):
    pass


class PipelineError(VolbenchError):
    """Wraps a module error with the shape and circuit index it came from."""

    def __init__(self, shape, index, cause):
        self.shape = shape
        self.index = index
        self.cause = cause
        where = f"shape (w={shape[0]}, d={shape[1]})"
        if index is not None:
            where += f", circuit {index}"
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")

    def __reduce__(self):
        return type(self), (self.shape, self.index, self.cause)
