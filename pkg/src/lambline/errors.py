"""Exception types shared across the library."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class BelowCutoffError(InvalidArgumentError):
    """Propagating-wave quantity requested at or below the cutoff frequency."""


class AboveCutoffError(InvalidArgumentError):
    """Evanescent-wave quantity requested at or above the cutoff frequency."""


class SolverFailureError(RuntimeError):
    """A root search found no root inside its physical bracket."""


class DesignInfeasibleError(SolverFailureError):
    """No center frequency exists above the cutoffs for the requested geometry."""


class ResolutionError(ValueError):
    """A frequency grid is too coarse for the requested operation."""


class BandTruncatedError(ValueError):
    """The 3-dB band extends past the grid.  `edge` names the missing side."""

    def __init__(self, message: str, edge: str):
        super().__init__(message)
        self.edge = edge


class TouchstoneParseError(ValueError):
    """Malformed Touchstone file.  `line` is the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
