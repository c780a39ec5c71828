"""Shared exception types."""


class NumericalError(RuntimeError):
    """A computation produced numerically invalid results (broken frame,
    non-finite values, failed generation) rather than bad input."""
