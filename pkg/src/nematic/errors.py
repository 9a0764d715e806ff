"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DivergenceError(RuntimeError):
    """A relaxation left its admissible region (energy blow-up or sup-norm bound)."""


class ConfigError(ValueError):
    """Invalid or unknown run-configuration entry."""
