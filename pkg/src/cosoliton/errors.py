"""Shared exception types."""


class CosolitonError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(CosolitonError):
    """Invalid input document or configuration (schema violations, bad field values)."""


class NumericalError(CosolitonError):
    """Numerical failure: singular frame, non-positive-definite metric, ill conditioning."""
