"""Exception hierarchy shared across the package.

Two broad failure classes matter to callers (and to the CLI exit codes):
bad inputs (``ValidationError``, exit code 2) and numerical/convergence
failures (``NumericalError``, exit code 3).
"""


class ValidationError(ValueError):
    """Inputs violate a documented precondition or device constraint."""


class CompileError(ValidationError):
    """A circuit cannot be lowered onto the given register/device."""


class NumericalError(RuntimeError):
    """An iterative numerical procedure failed to converge."""


class GenerationError(NumericalError):
    """Rejection sampling could not fill its quota.

    Carries the acceptance statistics observed before giving up.
    """

    def __init__(self, message, attempts=0, accepted=0):
        super().__init__(message)
        self.attempts = attempts
        self.accepted = accepted
