"""Top-ratio to record-count resolution.

Published coverage tables print (ratio, k) pairs; round-half-up on
ratio * base reproduces them. ``base`` defaults to the dataset size but can
be overridden when a table's printed counts were computed against a
different base (see the reproduction scripts).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import UsageError


def round_half_up(x: Fraction) -> int:
    """Round to nearest integer, halves away from zero (for positive x)."""
    return int((x + Fraction(1, 2)).__floor__())


def resolve_k(ratio: Fraction | float, n: int, base: int | None = None) -> int:
    """Number of records a top ratio selects out of n.

    ``ratio`` must lie in (0, 1]. Floats are converted exactly (their binary
    value), so prefer Fractions for decimal ratios like 5%.
    """
    frac = ratio if isinstance(ratio, Fraction) else Fraction(ratio)
    if not 0 < frac <= 1:
        raise UsageError(f"top ratio must be in (0, 1], got {ratio}")
    return round_half_up(frac * (base if base is not None else n))
