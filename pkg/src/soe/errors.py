"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
anything else -> 3.
"""


class SoeError(Exception):
    """Base class for all package errors."""


class UsageError(SoeError):
    """Caller supplied invalid parameters (bad flag value, wrong attribute kind)."""


class DataError(SoeError):
    """Input data is malformed or inconsistent (ragged CSV, empty file)."""


class EmptyFactorVectorError(UsageError):
    """A combiner was applied to zero factors; the caller must decide what that means."""
