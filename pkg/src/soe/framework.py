"""General subspace-ensemble detection with pluggable per-subspace detectors.

Step 1 computes an outlier factor for every (subspace, record) pair; step 2
fuses each record's factors with a combiner and ranks. Any detector that
emits per-record factors in [0, 1] plugs in; the one shipped here scores a
record by the relative frequency of its full projected tuple within the
subspace, which for one-dimensional subspaces reduces exactly to the
single-attribute detector.

Running over all singleton subspaces therefore reproduces
:func:`soe.soe1.detect` bit for bit; the fusion and ranking machinery is
shared between the two paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .combiners import Combiner
from .dataset import ABSENT, Dataset
from .errors import UsageError
from .soe1 import DetectStats, FactorSource, Polarity, ScoredRecord, _fuse_and_rank

DEFAULT_ENUMERATION_CAP = 100_000


@dataclass(frozen=True)
class Subspace:
    """A non-empty set of attribute indices in canonical (sorted) form."""

    attrs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.attrs) == 0:
            raise UsageError("a subspace must contain at least one attribute")
        if len(set(self.attrs)) != len(self.attrs):
            raise UsageError(f"duplicate attribute indices in subspace {self.attrs}")
        object.__setattr__(self, "attrs", tuple(sorted(self.attrs)))

    @property
    def dim(self) -> int:
        return len(self.attrs)

    def validate_against(self, ds: Dataset) -> None:
        for a in self.attrs:
            if not 0 <= a < ds.d:
                raise UsageError(f"subspace attribute index {a} out of range")
            if a == ds.schema.class_column:
                raise UsageError("the class column cannot be part of a subspace")


@runtime_checkable
class SubspaceDetector(Protocol):
    """Per-subspace factor computation.

    ``polarity`` declares how the emitted factors read: FREQUENCY factors
    shrink for outliers (ascending ranking), RARITY factors grow
    (descending). All factors must lie in [0, 1] and be deterministic for a
    fixed dataset.
    """

    polarity: Polarity

    def factor_source(self, ds: Dataset, subspace: Subspace) -> FactorSource: ...


@dataclass(frozen=True)
class JointFrequencyDetector:
    """Scores a record by how common its projected tuple is in the subspace.

    factor = (# records sharing the tuple) / (# records fully present in
    the subspace); RARITY polarity emits the complement.
    """

    polarity: Polarity = Polarity.FREQUENCY

    def factor_source(self, ds: Dataset, subspace: Subspace) -> FactorSource:
        subspace.validate_against(ds)
        cols = [ds.column(a) for a in subspace.attrs]
        stacked = np.column_stack(cols)
        present = np.all(stacked != ABSENT, axis=1)
        n_present = int(present.sum())
        ids = np.full(ds.n, ABSENT, dtype=np.int64)
        rows = stacked[present]
        if n_present == 0:
            return FactorSource(table=np.empty(0), ids=ids, has_absent=True)
        _, inverse, counts = np.unique(
            rows, axis=0, return_inverse=True, return_counts=True
        )
        table = counts / n_present
        if self.polarity is Polarity.RARITY:
            table = 1.0 - table
        ids[present] = inverse.reshape(-1)
        return FactorSource(table=table, ids=ids, has_absent=n_present < ds.n)

    def factors(self, ds: Dataset, subspace: Subspace) -> np.ndarray:
        """Per-record factors as an array; NaN marks absent projections."""
        src = self.factor_source(ds, subspace)
        out = np.full(ds.n, np.nan)
        present = src.ids != ABSENT
        out[present] = src.table[src.ids[present]]
        return out


@dataclass(frozen=True)
class SubspaceSet:
    """The subspaces to mine, each optionally bound to its own detector.

    When ``detectors`` is None every subspace uses the joint-frequency
    detector with the polarity requested at run time.
    """

    subspaces: tuple[Subspace, ...]
    detectors: tuple[SubspaceDetector, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.subspaces) == 0:
            raise UsageError("the subspace set must not be empty")
        if len(set(self.subspaces)) != len(self.subspaces):
            raise UsageError("duplicate subspaces in subspace set")
        if self.detectors is not None and len(self.detectors) != len(self.subspaces):
            raise UsageError("need exactly one detector per subspace")

    @classmethod
    def of(cls, *attr_sets: Sequence[int]) -> "SubspaceSet":
        return cls(subspaces=tuple(Subspace(tuple(s)) for s in attr_sets))


def singletons(ds: Dataset) -> SubspaceSet:
    """One subspace per detection attribute."""
    return SubspaceSet(
        subspaces=tuple(Subspace((a,)) for a in ds.schema.detection_attrs())
    )


def joint_frequency_factor(ds: Dataset, s: Subspace, record: int) -> float:
    """Relative frequency of the record's projected tuple within subspace s."""
    if not 0 <= record < ds.n:
        raise IndexError(f"record index {record} out of range")
    src = JointFrequencyDetector(Polarity.FREQUENCY).factor_source(ds, s)
    vid = src.ids[record]
    if vid == ABSENT:
        raise UsageError(f"record {record} has a missing cell in subspace {s.attrs}")
    return float(src.table[vid])


def run_framework(
    ds: Dataset,
    ss: SubspaceSet,
    combiner: Combiner,
    k: int,
    polarity: Polarity = Polarity.FREQUENCY,
    log_space: bool = False,
    threads: int = 1,
) -> list[ScoredRecord]:
    results, _ = run_framework_with_stats(
        ds, ss, combiner, k, polarity, log_space=log_space, threads=threads
    )
    return results


def run_framework_with_stats(
    ds: Dataset,
    ss: SubspaceSet,
    combiner: Combiner,
    k: int,
    polarity: Polarity = Polarity.FREQUENCY,
    log_space: bool = False,
    threads: int = 1,
) -> tuple[list[ScoredRecord], DetectStats]:
    """Two-step mining: per-subspace factors, then per-record fusion."""
    if k < 1:
        raise UsageError(f"k must be a positive integer, got {k}")
    if k > ds.n:
        raise UsageError(f"k={k} exceeds the {ds.n} records in the dataset")
    detectors: Sequence[SubspaceDetector]
    if ss.detectors is None:
        detectors = [JointFrequencyDetector(polarity)] * len(ss.subspaces)
    else:
        detectors = ss.detectors
        for det in detectors:
            if det.polarity is not polarity:
                raise UsageError(
                    f"detector polarity {det.polarity.value} conflicts with the "
                    f"requested ranking polarity {polarity.value}"
                )
    sources = []
    for sub, det in zip(ss.subspaces, detectors):
        sub.validate_against(ds)
        sources.append(det.factor_source(ds, sub))
    return _fuse_and_rank(
        ds.n, sources, combiner, polarity, k, log_space=log_space, threads=threads
    )


def run_per_subspace(
    ds: Dataset,
    ss: SubspaceSet,
    k: int,
    polarity: Polarity = Polarity.FREQUENCY,
) -> list[tuple[Subspace, list[ScoredRecord]]]:
    """One independent ranking per subspace, skipping the ensemble step."""
    out = []
    for sub in ss.subspaces:
        single = SubspaceSet(subspaces=(sub,))
        out.append(
            (sub, run_framework(ds, single, Combiner("product"), k, polarity))
        )
    return out


def enumerate_subspaces(
    d: int, max_dim: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> SubspaceSet:
    """All subspaces of dimension <= max_dim over attributes 0..d-1.

    Canonical order: ascending dimension, then lexicographic. Refuses to
    materialize more than ``cap`` subspaces.
    """
    from itertools import combinations

    if not 1 <= max_dim <= d:
        raise UsageError(f"max_dim must be in 1..{d}, got {max_dim}")
    count = sum(math.comb(d, i) for i in range(1, max_dim + 1))
    if count > cap:
        raise UsageError(
            f"enumeration would produce {count} subspaces, exceeding the cap of {cap}"
        )
    subs = []
    for dim in range(1, max_dim + 1):
        for attrs in combinations(range(d), dim):
            subs.append(Subspace(attrs))
    return SubspaceSet(subspaces=tuple(subs))
