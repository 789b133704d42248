"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (bad file, bad labels, bad parameters)."""


class ResourceLimitError(RuntimeError):
    """A configured work limit was exceeded; partial results may be attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class VerificationError(RuntimeError):
    """An internal re-verification failed; indicates a bug, carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
