"""Score-fusion operators for per-subspace outlier factors.

Four operators fuse a factor vector (v_1 .. v_m), every v_i in [0, 1]:

* product:  v_1 * v_2 * ... * v_m
* addition: v_1 + v_2 + ... + v_m
* s_q:      (v_1^q + ... + v_m^q)^(1/q)   (q >= 1; q = 1 is addition)
* s_inf:    max(v_1, ..., v_m)            (limit of s_q as q grows)

All four are permutation-invariant and monotone non-decreasing in each
coordinate; a single factor passes through unchanged for every operator.
Evaluation order is fixed (ascending argument index) so scores are
bit-reproducible, and integer powers are computed by repeated
multiplication so scalar and vectorized callers round identically.

s_q is conventionally restricted to odd q, which only matters for signed
inputs; factors here are non-negative, so even q is accepted with a
warning rather than rejected.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyFactorVectorError, UsageError

PRODUCT = "product"
ADDITION = "addition"
S_Q = "s_q"
S_INF = "s_inf"


@dataclass(frozen=True)
class Combiner:
    """One of the four fusion operators; ``q`` is set only for the s_q rule."""

    kind: str
    q: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (PRODUCT, ADDITION, S_Q, S_INF):
            raise UsageError(f"unknown combiner kind {self.kind!r}")
        if self.kind == S_Q:
            if self.q is None or self.q < 1:
                raise UsageError(f"s_q requires an integer q >= 1, got {self.q}")
        elif self.q is not None:
            raise UsageError(f"combiner {self.kind} does not take q")

    def spec(self) -> str:
        """The CLI token for this combiner (inverse of parse_combiner)."""
        return {
            PRODUCT: "prod",
            ADDITION: "sum",
            S_Q: f"sq:{self.q}",
            S_INF: "sinf",
        }[self.kind]


def pow_int(value: float, q: int) -> float:
    """value**q for integer q >= 1, by repeated multiplication.

    Both the scalar and vectorized scoring paths use this scheme so the
    rounding sequence is identical.
    """
    acc = value
    for _ in range(q - 1):
        acc *= value
    return acc


def combine(c: Combiner, values: Sequence[float]) -> float:
    """Fuse a factor vector into one score.

    Raises EmptyFactorVectorError for m = 0 (the caller decides what an
    empty vector means) and UsageError for factors outside [0, 1].
    """
    m = len(values)
    if m == 0:
        raise EmptyFactorVectorError("cannot combine an empty factor vector")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise UsageError(f"factor {v!r} outside [0, 1]")
    if m == 1:
        return float(values[0])
    if c.kind == PRODUCT:
        acc = float(values[0])
        for v in values[1:]:
            acc *= v
        return acc
    if c.kind == ADDITION:
        acc = float(values[0])
        for v in values[1:]:
            acc += v
        return acc
    if c.kind == S_Q:
        assert c.q is not None
        acc = pow_int(float(values[0]), c.q)
        for v in values[1:]:
            acc += pow_int(float(v), c.q)
        return acc ** (1.0 / c.q)
    # s_inf: all factors are non-negative, so largest absolute value = max.
    return float(max(values))


def combine_log_product(values: Sequence[float]) -> float:
    """Product in log space: sum of log(v_i).

    Rank-preserving for the product operator (log is strictly monotone on
    (0, 1]); the score itself is the log of the linear-space product, so a
    hundreds-of-attributes product that would underflow stays finite.
    """
    m = len(values)
    if m == 0:
        raise EmptyFactorVectorError("cannot combine an empty factor vector")
    acc = 0.0
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise UsageError(f"factor {v!r} outside [0, 1]")
        acc += math.log(v) if v > 0.0 else -math.inf
    return acc


def parse_combiner(spec: str) -> Combiner:
    """Parse a CLI combiner token: prod | sum | sq:<q> | sinf."""
    text = spec.strip().lower()
    if text == "prod":
        return Combiner(PRODUCT)
    if text == "sum":
        return Combiner(ADDITION)
    if text == "sinf":
        return Combiner(S_INF)
    if text.startswith("sq:"):
        raw = text[3:]
        try:
            q = int(raw)
        except ValueError:
            raise UsageError(f"invalid s_q parameter {raw!r}") from None
        if q < 1:
            raise UsageError(f"s_q requires q >= 1, got {q}")
        if q % 2 == 0:
            warnings.warn(
                f"s_q with even q={q}: the s_q family is conventionally "
                "restricted to odd q, which only matters for signed inputs; "
                "non-negative factors make even q safe",
                UserWarning,
                stacklevel=2,
            )
        return Combiner(S_Q, q=q)
    raise UsageError(f"unknown combiner {spec!r} (expected prod|sum|sq:<q>|sinf)")
