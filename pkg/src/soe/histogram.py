"""Per-attribute value-frequency tables built in one streaming scan.

Counts are dense integer arrays indexed by value id (value ids are interned
small integers, so an array is the fastest possible hash table here).
Partition-and-merge construction is offered for parallel builds; it is
property-tested to be indistinguishable from the single-pass build.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import ABSENT, Dataset, MissingPolicy
from .errors import DataError, UsageError


@dataclass
class Histogram:
    """Value-id -> frequency counts for one attribute.

    ``total`` is the number of contributing cells: n under the special
    policy, n minus that attribute's missing cells under ignore.
    """

    attr: int
    counts: np.ndarray  # int64, indexed by value id
    total: int

    def frequency(self, value_id: int) -> int:
        """Stored count, or 0 for a never-observed id."""
        if value_id < 0 or value_id >= len(self.counts):
            return 0
        return int(self.counts[value_id])

    def entry_count(self) -> int:
        """Number of distinct observed values (nonzero counts)."""
        return int(np.count_nonzero(self.counts))

    def as_dict(self) -> dict[int, int]:
        return {int(v): int(c) for v, c in enumerate(self.counts) if c > 0}


@dataclass
class HistogramSet:
    """One Histogram per detection attribute, keyed by attribute index."""

    per_attr: dict[int, Histogram]
    n: int

    def frequency(self, attr: int, value_id: int) -> int:
        return self.per_attr[attr].frequency(value_id)

    def entry_count(self) -> int:
        return sum(h.entry_count() for h in self.per_attr.values())


def build(ds: Dataset, policy: MissingPolicy | None = None) -> HistogramSet:
    """Count value frequencies for every detection attribute in a single scan.

    ``policy`` must match the policy the dataset was loaded under; it is
    accepted explicitly so call sites state their assumption.
    """
    if ds.n == 0:
        raise DataError("cannot build histograms over an empty dataset")
    if policy is not None and policy is not ds.missing_policy:
        raise UsageError(
            f"dataset was loaded with policy={ds.missing_policy.value}, "
            f"histograms requested with policy={policy.value}"
        )
    per_attr: dict[int, Histogram] = {}
    for attr in ds.schema.detection_attrs():
        if not ds.is_discretized(attr):
            raise UsageError(
                f"attribute {ds.schema.attributes[attr].name!r} is numeric and "
                "must be discretized before building histograms"
            )
        col = ds.column(attr)
        width = len(ds.value_table(attr))
        if ds.missing_policy is MissingPolicy.IGNORE:
            present = col[col != ABSENT]
            counts = np.bincount(present, minlength=width)
            total = int(present.size)
        else:
            counts = np.bincount(col, minlength=width)
            total = ds.n
        per_attr[attr] = Histogram(attr=attr, counts=counts.astype(np.int64), total=total)
    return HistogramSet(per_attr=per_attr, n=ds.n)


def empty_like(ds: Dataset) -> HistogramSet:
    """All-zero HistogramSet over the dataset's schema (merge identity)."""
    per_attr = {
        attr: Histogram(
            attr=attr,
            counts=np.zeros(len(ds.value_table(attr)), dtype=np.int64),
            total=0,
        )
        for attr in ds.schema.detection_attrs()
    }
    return HistogramSet(per_attr=per_attr, n=0)


def merge(h1: HistogramSet, h2: HistogramSet) -> HistogramSet:
    """Pointwise sum of two histogram sets over the same schema."""
    if set(h1.per_attr) != set(h2.per_attr):
        raise UsageError("cannot merge histogram sets over different attribute sets")
    merged: dict[int, Histogram] = {}
    for attr, a in h1.per_attr.items():
        b = h2.per_attr[attr]
        width = max(len(a.counts), len(b.counts))
        counts = np.zeros(width, dtype=np.int64)
        counts[: len(a.counts)] += a.counts
        counts[: len(b.counts)] += b.counts
        merged[attr] = Histogram(attr=attr, counts=counts, total=a.total + b.total)
    return HistogramSet(per_attr=merged, n=h1.n + h2.n)


def frequency(hs: HistogramSet, attr: int, value_id: int) -> int:
    """Count of records carrying ``value_id`` in attribute ``attr``."""
    if attr not in hs.per_attr:
        raise UsageError(f"no histogram for attribute {attr}")
    return hs.frequency(attr, value_id)


def build_partitioned(
    ds: Dataset, policy: MissingPolicy | None = None, parts: int = 2, threads: int = 1
) -> HistogramSet:
    """Build per-partition histograms over row ranges and merge them.

    Semantically identical to :func:`build`; exists so large builds can run
    concurrently (each partition owns a private HistogramSet).
    """
    if parts < 1:
        raise UsageError(f"parts must be >= 1, got {parts}")
    bounds = np.linspace(0, ds.n, parts + 1, dtype=int)
    slices = [ds.select_rows(slice(int(a), int(b))) for a, b in zip(bounds, bounds[1:])]
    slices = [s for s in slices if s.n > 0]
    if threads > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda s: build(s, policy), slices))
    else:
        partials = [build(s, policy) for s in slices]
    merged = partials[0]
    for h in partials[1:]:
        merged = merge(merged, h)
    return merged


def dump_tsv(ds: Dataset, hs: HistogramSet) -> str:
    """TSV of (attribute, value token, frequency) rows for every observed value."""
    lines = ["attribute\tvalue\tfrequency"]
    for attr in sorted(hs.per_attr):
        hist = hs.per_attr[attr]
        name = ds.schema.attributes[attr].name
        vt = ds.value_table(attr)
        for vid, count in enumerate(hist.counts):
            if count > 0:
                lines.append(f"{name}\t{vt[vid]}\t{int(count)}")
    return "\n".join(lines) + "\n"
