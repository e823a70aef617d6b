"""Shared exception types."""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


class DomainError(ValueError):
    """Numeric argument outside the valid domain of an operation."""
