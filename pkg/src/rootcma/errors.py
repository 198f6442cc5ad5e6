"""Exception hierarchy shared by all rootcma modules."""


class RootCmaError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RootCmaError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidScenarioError(RootCmaError, ValueError):
    """A scenario or geometry violates its invariants."""


class NumericError(RootCmaError, ArithmeticError):
    """Base for numerical failures (maps to CLI exit code 3)."""


class DivergedError(NumericError):
    """An adaptive filter produced a non-finite or runaway update.

    The last finite state is kept on ``state`` so callers can inspect it.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ReinitializationError(NumericError):
    """The RLS inverse correlation matrix lost positive definiteness."""


class UndefinedBoundError(DomainError):
    """The step-size bound is undefined for a zero input vector."""


class NotPositiveDefiniteError(NumericError):
    pass


class RankDeficiencyError(NumericError):
    pass


class IllConditionedError(NumericError):
    pass


class DegeneratePolynomialError(NumericError):
    pass


class DegenerateInputError(NumericError):
    pass


class NumericFailureError(NumericError):
    """An iterative method hit its iteration cap.

    ``partial`` carries the best estimates reached so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyModelError(NumericError):
    """Root selection kept no roots."""


class NoValidAngleError(NumericError):
    """Every selected root maps outside the visible region."""


class ConfigError(RootCmaError, ValueError):
    """Malformed or invalid experiment configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StageNotRunError(RootCmaError):
    """Figure data was requested for a pipeline stage that did not run."""
