"""Exception types shared across the package."""


class GuardError(ValueError):
    """A numerical guard failed (the grid cannot represent the request)."""


class NyquistError(GuardError):
    """Signal content above the grid's Nyquist frequency."""


class CoverageError(GuardError):
    """Signal or symbol support does not fit inside the grid."""
