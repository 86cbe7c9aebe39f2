"""Shared error type."""


class DomainError(ValueError):
    """A precondition on inputs is violated (maps to CLI exit code 2)."""
