"""Exception types shared across the package.

The split mirrors how callers need to react: model problems mean the
input description is unusable, domain problems mean a particular argument
is outside an operation's range, numerical problems mean an algorithm
failed to converge and retrying with the same inputs will not help.
"""


class DualRiskError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(DualRiskError):
    """The model description violates an invariant or fails a hypothesis."""


class ParseError(ModelError):
    """A model-spec document is malformed or contains unknown fields."""


class DomainError(DualRiskError, ValueError):
    """An argument lies outside the domain an operation supports."""


class NoClosedFormError(DualRiskError):
    """No closed-form pattern matches; the caller should use the general routine."""


class NumericsError(DualRiskError):
    """A numerical routine failed to reach the requested accuracy."""


class ConvergenceError(NumericsError):
    """Non-convergence after the iteration budget.

    Attributes:
        best_estimate: the most accurate value obtained before giving up,
            or None when nothing usable was produced.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
