"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid construction-time configuration (bad sizes, ranges, variants)."""


class QubitBudgetError(ConfigError):
    """Input dimension exceeds what a plain VQC can encode on the qubit budget."""


class UnsupportedGateError(ValueError):
    """A trainable slot addresses a gate the parameter-shift rule cannot handle."""
