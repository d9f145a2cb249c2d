"""Exception hierarchy shared across the package."""


class TopoformerError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(TopoformerError, ValueError):
    """An argument is outside the documented domain of an operation."""


class ParseError(TopoformerError, ValueError):
    """A graph file is malformed.  Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShapeError(TopoformerError, ValueError):
    """Tensor operands have incompatible shapes."""


class CapabilityError(TopoformerError):
    """The input exceeds a deliberate size guard (e.g. the 3-WL cutoff)."""


class HypothesisError(TopoformerError, ValueError):
    """A verdict was requested for graphs violating the theorem hypothesis."""


class SplitError(TopoformerError, ValueError):
    """A dataset split cannot be realized with the requested fractions."""
