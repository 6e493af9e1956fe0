"""Rare-class coverage evaluation.

Records whose class label is rare (an explicit label list, or any class
occupying less than a threshold fraction of the dataset) are treated as
ground-truth outliers. A detector's full ranking is then swept over a grid
of top ratios; each row reports how many rare records land in the top k
and the fraction of all rare records that captures.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .dataset import ABSENT, Dataset
from .errors import UsageError
from .ratios import resolve_k
from .soe1 import ScoredRecord


@dataclass(frozen=True)
class RareClassSpec:
    """Which classes count as rare: an explicit list or a frequency threshold."""

    labels: frozenset[str] | None = None
    threshold: float | None = None

    def __post_init__(self) -> None:
        if (self.labels is None) == (self.threshold is None):
            raise UsageError("specify exactly one of labels and threshold")
        if self.threshold is not None and not 0 < self.threshold < 1:
            raise UsageError(f"threshold must be in (0, 1), got {self.threshold}")

    @classmethod
    def explicit(cls, *labels: str) -> "RareClassSpec":
        return cls(labels=frozenset(labels))

    @classmethod
    def under(cls, threshold: float) -> "RareClassSpec":
        return cls(threshold=threshold)


@dataclass(frozen=True)
class CoverageRow:
    top_ratio: Fraction
    k: int
    detected: int
    coverage: float


def rare_class_labels(ds: Dataset, spec: RareClassSpec) -> set[str]:
    """The class labels considered rare under the spec."""
    cls_col = ds.schema.class_column
    if cls_col is None:
        raise UsageError("dataset has no class column")
    col = ds.column(cls_col)
    vt = ds.value_table(cls_col)
    if spec.labels is not None:
        return set(spec.labels)
    counts = np.bincount(col[col != ABSENT], minlength=len(vt))
    return {
        vt[vid]
        for vid in range(len(vt))
        if 0 < counts[vid] and counts[vid] / ds.n < spec.threshold
    }


def label_rare(ds: Dataset, spec: RareClassSpec) -> set[int]:
    """Indices of the records whose class label is rare."""
    cls_col = ds.schema.class_column
    if cls_col is None:
        raise UsageError("dataset has no class column")
    rare_labels = rare_class_labels(ds, spec)
    col = ds.column(cls_col)
    vt = ds.value_table(cls_col)
    rare_ids = {vid for vid, tok in enumerate(vt) if tok in rare_labels}
    return {int(i) for i in np.nonzero(np.isin(col, list(rare_ids)))[0]}


def coverage_table(
    ranking: Sequence[ScoredRecord],
    rare: set[int],
    ratios: Sequence[Fraction | float],
    k_base: int | None = None,
) -> list[CoverageRow]:
    """Coverage of the rare set at each top ratio of a full ranking.

    ``k_base`` overrides the record count used to resolve ratios into k
    values, for reproducing tables whose printed counts were computed
    against a different base than the actual dataset size.
    """
    if not rare:
        raise UsageError("the rare record set is empty")
    n = len(ranking)
    rows = []
    for ratio in ratios:
        frac = ratio if isinstance(ratio, Fraction) else Fraction(ratio)
        k = resolve_k(frac, n, base=k_base)
        k = min(k, n)
        detected = sum(1 for sr in ranking[:k] if sr.record in rare)
        rows.append(
            CoverageRow(
                top_ratio=frac, k=k, detected=detected, coverage=detected / len(rare)
            )
        )
    return rows


def compare_report(tables: Mapping[str, Sequence[CoverageRow]]) -> str:
    """Aligned side-by-side coverage table, one column per configuration."""
    if not tables:
        raise UsageError("no coverage tables to compare")
    names = list(tables)
    grids = [tuple(r.top_ratio for r in tables[name]) for name in names]
    if len(set(grids)) != 1:
        raise UsageError("coverage tables use different ratio grids")
    first = tables[names[0]]
    header = ["Top Ratio (Records)"] + names
    lines = [header]
    for i, row in enumerate(first):
        pct = f"{float(row.top_ratio) * 100:g}%({row.k})"
        cells = [pct]
        for name in names:
            r = tables[name][i]
            cells.append(f"{r.detected}({r.coverage * 100:.2f}%)")
        lines.append(cells)
    widths = [max(len(line[c]) for line in lines) for c in range(len(header))]
    rendered = []
    for line in lines:
        rendered.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(line)))
    return "\n".join(rendered) + "\n"


def coverage_tsv(tables: Mapping[str, Sequence[CoverageRow]]) -> str:
    """Machine-readable TSV: one row per (configuration, ratio)."""
    lines = ["config\ttop_ratio\tk\tdetected\tcoverage"]
    for name, rows in tables.items():
        for r in rows:
            lines.append(
                f"{name}\t{float(r.top_ratio)!r}\t{r.k}\t{r.detected}\t{r.coverage!r}"
            )
    return "\n".join(lines) + "\n"
