"""Two-scan top-k outlier detection over single-attribute frequencies.

Scan 1 builds per-attribute histograms; scan 2 turns each record's cell
frequencies into factors, fuses them with a combiner, and keeps the top-k
most outlying records in a bounded heap. The detector reads the dataset
exactly twice regardless of k, operator, or polarity.

Polarity decides both the factor and the ranking direction:

* ``frequency``: factor = f / total; smaller combined score = more
  outlying, so the ranking is ascending.
* ``rarity``: factor = 1 - f / total; the ranking is descending.

The two agree for the addition operator (the factors sum to a constant
complement) but genuinely disagree for product and s_q, so both are
exposed. Ties are always broken by ascending record index.

Scoring is chunked and heap-bounded so auxiliary memory stays at the
histogram entries plus k heap slots; per-record arithmetic uses a fixed
evaluation order (ascending attribute index, integer powers by repeated
multiplication) so results are bit-reproducible across runs, thread
counts, and the scalar reference path. The s_q operator ranks on the
power sum (order-equivalent to its q-th root, which would blur distinct
sums together at float precision); only the reported score takes the root.
"""

from __future__ import annotations

import heapq
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import histogram
from .combiners import PRODUCT, S_INF, S_Q, Combiner
from .dataset import ABSENT, Dataset, MissingPolicy
from .errors import UsageError
from .ratios import resolve_k

logger = logging.getLogger(__name__)

_CHUNK = 16384


class Polarity(str, Enum):
    FREQUENCY = "frequency"  # factor = normalized frequency; rank ascending
    RARITY = "rarity"  # factor = 1 - normalized frequency; rank descending


@dataclass(frozen=True)
class Soe1Config:
    """Detection parameters. Exactly one of ``k`` / ``top_ratio`` is set."""

    k: int | None = None
    top_ratio: Fraction | float | None = None
    combiner: Combiner = Combiner(PRODUCT)
    policy: MissingPolicy = MissingPolicy.SPECIAL
    polarity: Polarity = Polarity.FREQUENCY
    log_space: bool = False
    threads: int = 1

    def resolve_k(self, n: int) -> int:
        if (self.k is None) == (self.top_ratio is None):
            raise UsageError("exactly one of k and top_ratio must be set")
        if self.k is not None:
            k = self.k
        else:
            k = resolve_k(self.top_ratio, n)
        if k < 1:
            raise UsageError(f"k must be a positive integer, got {k}")
        if k > n:
            raise UsageError(f"k={k} exceeds the {n} records in the dataset")
        return k


@dataclass(frozen=True)
class ScoredRecord:
    record: int
    score: float
    rank: int  # 1-based


@dataclass
class DetectStats:
    """Instrumentation captured by detect_with_stats."""

    record_reads: float = 0.0
    max_heap_entries: int = 0
    histogram_entries: int = 0
    excluded_records: int = 0
    scored_records: int = 0


#: One scoring input: a factor lookup table plus per-record ids into it.
#: id == ABSENT marks a cell excluded from the record's factor vector;
#: has_absent=None means "unknown, scan to find out".
@dataclass(frozen=True)
class FactorSource:
    table: np.ndarray  # float64 factors per distinct value
    ids: np.ndarray  # int64 per record
    has_absent: bool | None = None


def subspace_factor(
    hs: histogram.HistogramSet,
    ds: Dataset,
    record: int,
    attr: int,
    polarity: Polarity = Polarity.FREQUENCY,
) -> float | None:
    """The record's factor in the single-attribute subspace ``attr``.

    Returns None (ABSENT) when the cell is missing under the ignore policy.
    """
    if not 0 <= record < ds.n:
        raise IndexError(f"record index {record} out of range")
    vid = int(ds.column(attr)[record])
    if vid == ABSENT:
        return None
    hist = hs.per_attr[attr]
    f = hist.frequency(vid) / hist.total
    return f if polarity is Polarity.FREQUENCY else 1.0 - f


def _factor_table(hist: histogram.Histogram, polarity: Polarity) -> np.ndarray:
    f = hist.counts / hist.total
    return f if polarity is Polarity.FREQUENCY else 1.0 - f


def _pow_table(table: np.ndarray, q: int) -> np.ndarray:
    # Repeated multiplication, matching the scalar reference rounding.
    acc = table.copy()
    for _ in range(q - 1):
        acc = acc * table
    return acc


def _fuse_and_rank(
    n: int,
    sources: Sequence[FactorSource],
    combiner: Combiner,
    polarity: Polarity,
    k: int,
    log_space: bool = False,
    threads: int = 1,
) -> tuple[list[ScoredRecord], DetectStats]:
    """Fuse per-source factors into scores and keep the top-k records.

    Shared by the single-attribute detector and the general framework.
    """
    use_log = log_space and combiner.kind == PRODUCT
    # A source with an empty factor table has every cell absent (nothing was
    # ever interned), so it contributes no factor to any record: drop it.
    sources = [src for src in sources if src.table.size]
    if not sources:
        stats = DetectStats(excluded_records=n)
        logger.warning(
            "%d record(s) had no present cells and were excluded from the ranking", n
        )
        return [], stats
    work_tables = []
    for src in sources:
        if combiner.kind == S_Q:
            work_tables.append(_pow_table(src.table, combiner.q))
        elif use_log:
            with np.errstate(divide="ignore"):
                work_tables.append(np.log(src.table))
        else:
            work_tables.append(src.table)
    plain_tables = [src.table for src in sources]
    id_cols = [src.ids for src in sources]
    descending = polarity is Polarity.RARITY
    track_plain = combiner.kind == S_Q
    absent_flags = [
        bool((src.ids == ABSENT).any()) if src.has_absent is None else src.has_absent
        for src in sources
    ]
    n_always = sum(1 for flag in absent_flags if not flag)

    stats = DetectStats()

    # Heap entries are ((-okey, -idx), m, plain_sum); the (-okey, -idx) pair
    # is unique per record, so payload fields never participate in ordering.
    def scan_range(lo_hi: tuple[int, int]) -> tuple[list, int, int]:
        lo, hi = lo_hi
        local: list[tuple[tuple[float, int], int, float]] = []
        excluded = 0
        max_heap = 0
        for start in range(lo, hi, _CHUNK):
            stop = min(start + _CHUNK, hi)
            size = stop - start
            if combiner.kind == PRODUCT and not use_log:
                acc = np.ones(size)
            elif combiner.kind == S_INF:
                acc = np.full(size, -np.inf)
            else:
                acc = np.zeros(size)
            plain_sum = np.zeros(size) if track_plain else None
            mixed = n_always < len(sources)
            m_count = np.full(size, n_always, dtype=np.int32) if mixed else None
            for has_absent, ids, work, plain in zip(
                absent_flags, id_cols, work_tables, plain_tables
            ):
                sel = ids[start:stop]
                if has_absent:
                    present = sel != ABSENT
                    safe = np.where(present, sel, 0)
                    vals = work[safe]
                    if combiner.kind == PRODUCT and not use_log:
                        vals[~present] = 1.0
                        acc *= vals
                    elif combiner.kind == S_INF:
                        vals[~present] = -np.inf
                        np.maximum(acc, vals, out=acc)
                    else:
                        vals[~present] = 0.0
                        acc += vals
                    if track_plain:
                        pvals = plain[safe]
                        pvals[~present] = 0.0
                        plain_sum += pvals
                    m_count += present
                else:
                    vals = work[sel]
                    if combiner.kind == PRODUCT and not use_log:
                        acc *= vals
                    elif combiner.kind == S_INF:
                        np.maximum(acc, vals, out=acc)
                    else:
                        acc += vals
                    if track_plain:
                        plain_sum += plain[sel]
            okey = -acc if descending else acc
            if m_count is None:
                offs = None  # every record in the chunk is scoreable
                n_scoreable = size
            else:
                offs = np.nonzero(m_count > 0)[0]
                n_scoreable = len(offs)
                excluded += size - n_scoreable

            def entry_at(off: int) -> tuple[tuple[float, int], int, float]:
                item = (-float(okey[off]), -(start + off))
                m = len(sources) if m_count is None else int(m_count[off])
                plain_v = float(plain_sum[off]) if track_plain else 0.0
                return (item, m, plain_v)

            # Only a chunk's k best records (plus boundary ties) can enter
            # the global top-k, so select them vectorized before touching
            # the heap; per-push rechecks keep the result exact.
            keys = okey if offs is None else okey[offs]
            if len(local) >= k and n_scoreable:
                # strictly worse than the kept worst: the chunk cannot
                # contribute (equality could still win on the index tie)
                if float(keys.min()) > -local[0][0][0]:
                    continue
            if n_scoreable > k:
                kth = keys[np.argpartition(keys, k - 1)[k - 1]]
                mask = keys <= kth
                cand = np.nonzero(mask)[0] if offs is None else offs[mask]
            else:
                cand = np.arange(size) if offs is None else offs
            if len(local) >= k:
                wkey, widx = local[0][0]
                ckeys = okey[cand]
                cand = cand[
                    (ckeys < -wkey) | ((ckeys == -wkey) & ((start + cand) < -widx))
                ]
            for off in cand:
                entry = entry_at(int(off))
                if len(local) < k:
                    heapq.heappush(local, entry)
                elif entry[0] > local[0][0]:
                    heapq.heapreplace(local, entry)
            max_heap = max(max_heap, len(local))
        return local, excluded, max_heap

    # Cap workers so each owns at least one full chunk; a thread pool is
    # pure overhead on ranges smaller than that.
    workers = min(threads, max(1, n // _CHUNK))
    ranges: list[tuple[int, int]]
    if workers > 1:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        ranges = [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if a < b]
    else:
        ranges = [(0, n)]
    if len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(scan_range, ranges))
    else:
        results = [scan_range(ranges[0])]

    candidates: list[tuple[tuple[float, int], int, float]] = []
    for local, excluded, max_heap in results:
        candidates.extend(local)
        stats.excluded_records += excluded
        stats.max_heap_entries = max(stats.max_heap_entries, max_heap)
    if stats.excluded_records:
        logger.warning(
            "%d record(s) had no present cells and were excluded from the ranking",
            stats.excluded_records,
        )
    # Best first: smallest okey, ties by ascending record index.
    candidates.sort(key=lambda e: (-e[0][0], -e[0][1]))
    top = candidates[:k]

    results_out: list[ScoredRecord] = []
    for rank, (item, m, plain_sum) in enumerate(top, start=1):
        okey = -item[0]
        idx = -item[1]
        score = -okey if descending else okey
        if combiner.kind == S_Q:
            # A single factor passes through every operator unchanged.
            score = plain_sum if m == 1 else score ** (1.0 / combiner.q)
        results_out.append(ScoredRecord(record=idx, score=score, rank=rank))
    stats.scored_records = n - stats.excluded_records
    return results_out, stats


def _sources_from_histograms(
    ds: Dataset, hs: histogram.HistogramSet, polarity: Polarity
) -> list[FactorSource]:
    special = ds.missing_policy is MissingPolicy.SPECIAL
    sources = []
    for attr in ds.schema.detection_attrs():
        table = _factor_table(hs.per_attr[attr], polarity)
        sources.append(
            FactorSource(
                table=table,
                ids=ds.column(attr),
                # the special policy interns missing cells, so none are absent
                has_absent=False if special else None,
            )
        )
    return sources


def detect_with_stats(ds: Dataset, cfg: Soe1Config) -> tuple[list[ScoredRecord], DetectStats]:
    """Run both scans and return the top-k ranking plus instrumentation."""
    k = cfg.resolve_k(ds.n)
    if cfg.policy is not ds.missing_policy:
        raise UsageError(
            f"dataset was loaded with policy={ds.missing_policy.value}, "
            f"detection requested with policy={cfg.policy.value}"
        )
    reads_before = ds.cell_reads
    hs = histogram.build(ds, cfg.policy)  # scan 1
    sources = _sources_from_histograms(ds, hs, cfg.polarity)  # scan 2 column fetch
    results, stats = _fuse_and_rank(
        ds.n,
        sources,
        cfg.combiner,
        cfg.polarity,
        k,
        log_space=cfg.log_space,
        threads=cfg.threads,
    )
    d = len(ds.schema.detection_attrs())
    stats.record_reads = (ds.cell_reads - reads_before) / d if d else 0.0
    stats.histogram_entries = hs.entry_count()
    return results, stats


def detect(ds: Dataset, cfg: Soe1Config) -> list[ScoredRecord]:
    """Top-k most outlying records under the configured operator and polarity."""
    results, _ = detect_with_stats(ds, cfg)
    return results


def score_all(ds: Dataset, cfg: Soe1Config) -> list[ScoredRecord]:
    """Full ranking: detect with k = n (minus any all-absent records)."""
    full = Soe1Config(
        k=ds.n,
        top_ratio=None,
        combiner=cfg.combiner,
        policy=cfg.policy,
        polarity=cfg.polarity,
        log_space=cfg.log_space,
        threads=cfg.threads,
    )
    return detect(ds, full)


def explain(
    ds: Dataset, hs: histogram.HistogramSet, record: int, polarity: Polarity
) -> list[float | None]:
    """Per-attribute factor vector for one record (None = absent cell)."""
    return [
        subspace_factor(hs, ds, record, attr, polarity)
        for attr in ds.schema.detection_attrs()
    ]
