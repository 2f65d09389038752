"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid scenario configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class NumericalGuardError(ValueError):
    """A sampling or windowing guard tripped (aliasing, truncated pulse, ...)."""
