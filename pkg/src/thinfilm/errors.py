"""Exception hierarchy shared by the solver modules."""


class ThinFilmError(Exception):
    """Base class for all package errors."""


class DomainError(ThinFilmError, ValueError):
    """Argument outside the domain of a formula (e.g. v <= -1)."""


class PositivityError(DomainError):
    """A profile violates 1 + v > 0 on the sampling grid."""


class OutOfRangeError(ThinFilmError, ValueError):
    """Energy level outside the interval of periodic orbits."""


class NoSolutionError(ThinFilmError):
    """A root find or shooting problem has no admissible solution."""


class ConvergenceError(ThinFilmError):
    """An iterative solver failed to converge."""


class StepFailure(ConvergenceError):
    """Continuation step size fell below its floor."""


class ResolutionError(ThinFilmError):
    """The discretisation does not resolve the supplied state."""


class WindowNotReached(ThinFilmError):
    """A growth-rate fit window was never entered."""


class ConfigError(ThinFilmError, ValueError):
    """Malformed or out-of-range run configuration."""


class HeightFloorError(ThinFilmError):
    """Thin-film evolution dropped below the height floor (rupture onset)."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class BlowUpError(ThinFilmError):
    """Amplitude-equation solution exceeded the overflow bound."""

    def __init__(self, message, T=None):
        super().__init__(message)
        self.T = T
