"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inadmissible input (CLI exit code 1)."""


class InvariantError(RuntimeError):
    """An internal consistency check failed (CLI exit code 2)."""
