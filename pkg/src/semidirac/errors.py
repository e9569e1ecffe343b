"""Exception hierarchy. Each class maps to one CLI exit code."""


class SemiDiracError(Exception):
    exit_code = 1


class ScenarioError(SemiDiracError, ValueError):
    """Malformed or incomplete scenario description."""

    exit_code = 2


class PreconditionError(SemiDiracError, ValueError):
    """Inputs outside the regime where an operation is defined."""

    exit_code = 3


class InsufficientDataError(PreconditionError):
    """Trajectory too short or too quiet for the requested estimator."""


class NumericalError(SemiDiracError, RuntimeError):
    """Integration or finite-difference failure (NaN, step underflow, ...)."""

    exit_code = 4
