class FiberMortarError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FiberMortarError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class GeometryError(FiberMortarError):
    """Invalid or inverted element geometry."""


class KinematicsError(FiberMortarError):
    """Degenerate beam centerline tangent."""


class EmbeddingError(FiberMortarError):
    """A beam point could not be located inside the solid mesh."""


class AssemblyError(FiberMortarError):
    pass


class SolverError(FiberMortarError):
    """Linear solve failure (singular or ill-posed tangent)."""


class ConvergenceError(FiberMortarError):
    """Newton iterations exhausted within a load step.

    ``history`` holds the residual norms of the failed step and ``states``
    the converged states of the preceding steps; ``last_state`` is the
    unconverged iterate.
    """

    def __init__(self, message, step=None, history=None, states=None, last_state=None):
        super().__init__(message)
        self.last_state = last_state
        self.step = step
        self.history = list(history or [])
        self.states = list(states or [])
