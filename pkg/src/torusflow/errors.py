"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value violates a documented constraint."""


class UsageError(ValueError):
    """An operation was called with incompatible arguments."""


class BlowUpError(RuntimeError):
    """The numerical solution left its admissible range.

    ``state`` holds whatever was known at the moment of failure so callers
    can dump it for inspection.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
