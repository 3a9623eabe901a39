class LhvOutError(ValueError):
    """Base class for domain errors raised by the package."""


class CapExceededError(LhvOutError):
    """An exhaustive enumeration would exceed its configured size cap."""


class InvariantError(LhvOutError):
    """An input object violates one of its structural invariants."""


class StageError(LhvOutError):
    """A pipeline stage failed; ``stage`` names where."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
