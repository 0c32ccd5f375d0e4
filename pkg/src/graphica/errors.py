"""Exception types shared across the toolkit."""


class GraphicaError(Exception):
    """Base class for every error raised by this package."""


class SizeError(GraphicaError):
    """Requested sizes are invalid or infeasible."""


class GenerationError(GraphicaError):
    """Topology generation could not satisfy a structural requirement."""


class SynthesisError(GraphicaError):
    """Row synthesis could not realize the intended label."""


class ShapeError(GraphicaError):
    """Operands whose dimensions do not conform."""


class DomainError(GraphicaError):
    """A value outside the domain an operation accepts."""


class EmptyInputError(GraphicaError):
    """An operation that needs data received none."""


class NumericError(GraphicaError):
    """A non-finite value appeared where a finite one is required."""


class StratificationError(GraphicaError):
    """A class is too small to spread across the requested folds."""


class TrainingError(GraphicaError):
    """Training diverged or could not proceed."""


class CompatibilityError(GraphicaError):
    """A checkpoint does not match the expected model layout."""
