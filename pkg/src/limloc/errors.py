"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is out of its admissible range."""


class IntegrityError(ValueError):
    """A data structure violates one of its invariants (overlap, bad grid, ...)."""


class RejectionBudgetError(RuntimeError):
    """A rejection loop ran out of attempts before accepting.

    ``acceptance_estimate`` is the observed acceptance fraction, which is
    usually 0 when this is raised but is still useful for sizing a rerun.
    """

    def __init__(self, message, attempts, accepted=0):
        super().__init__(message)
        self.attempts = int(attempts)
        self.accepted = int(accepted)
        self.acceptance_estimate = self.accepted / self.attempts if self.attempts else 0.0
