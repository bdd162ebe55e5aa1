"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class TruncationError(RuntimeError):
    """A truncated Fock basis is too large or too small for the request."""
