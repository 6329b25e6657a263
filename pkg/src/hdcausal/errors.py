"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed or degenerate input data (CLI exit code 1)."""


class ConvergenceError(Exception):
    """No usable solution: every tuning candidate failed (CLI exit code 2)."""
