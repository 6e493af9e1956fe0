"""Synthetic labeled categorical data and the detector scaling benchmark.

The generator draws each record by sampling a class uniformly, then each
attribute from a mixture of a class-specific mode value (weight
``class_skew``) and uniform noise. Generation is single-threaded and fully
determined by the seed. Absolute benchmark times depend on hardware; the
deliverable claim is the fitted log-log slope (linear scaling in both the
record count and the attribute count).
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .dataset import AttributeSpec, Dataset, MissingPolicy, Schema
from .errors import UsageError
from .soe1 import Soe1Config, detect


@dataclass(frozen=True)
class SynthSpec:
    rows: int
    attrs: int
    classes: int
    seed: int = 5
    values_per_attr: int = 10
    class_skew: float = 0.5

    def __post_init__(self) -> None:
        if self.rows < 1 or self.attrs < 1 or self.classes < 1:
            raise UsageError("rows, attrs, and classes must be positive")
        if self.rows < self.classes:
            raise UsageError(f"rows ({self.rows}) must be >= classes ({self.classes})")
        if self.values_per_attr < 2:
            raise UsageError("values_per_attr must be >= 2")
        if not 0.0 <= self.class_skew <= 1.0:
            raise UsageError(f"class_skew must be in [0, 1], got {self.class_skew}")

    @property
    def name(self) -> str:
        return f"synth-{self.rows}x{self.attrs}c{self.classes}s{self.seed}"


@dataclass(frozen=True)
class BenchResult:
    name: str
    sizes: tuple[int, ...]
    wall_times: tuple[float, ...]  # seconds, median of repeats
    slope: float | None  # fitted log-time vs log-size; None below 2 sizes
    threads: int = 1
    axis: str = "records"

    def __post_init__(self) -> None:
        if list(self.sizes) != sorted(set(self.sizes)):
            raise UsageError("benchmark sizes must be strictly increasing")
        if any(t <= 0 for t in self.wall_times):
            raise UsageError("benchmark times must be positive")


def generate(spec: SynthSpec) -> Dataset:
    """Class-correlated categorical dataset; last column is the class label."""
    rng = np.random.default_rng(spec.seed)
    v = spec.values_per_attr
    modes = rng.integers(0, v, size=(spec.classes, spec.attrs))
    cls = rng.integers(0, spec.classes, size=spec.rows)
    columns: list[np.ndarray] = []
    tables: list[list[str]] = []
    value_tokens = [f"v{i}" for i in range(v)]
    for j in range(spec.attrs):
        noise = rng.integers(0, v, size=spec.rows)
        pick_mode = rng.random(spec.rows) < spec.class_skew
        columns.append(np.where(pick_mode, modes[cls, j], noise).astype(np.int64))
        tables.append(value_tokens)
    columns.append(cls.astype(np.int64))
    tables.append([f"c{i}" for i in range(spec.classes)])
    specs = tuple(
        [AttributeSpec(name=f"a{j + 1}") for j in range(spec.attrs)]
        + [AttributeSpec(name="class")]
    )
    schema = Schema(specs, class_column=spec.attrs)
    return Dataset.from_ids(schema, columns, tables, MissingPolicy.SPECIAL)


def _fit_loglog_slope(sizes: list[int], times: list[float]) -> float | None:
    if len(sizes) < 2:
        return None
    slope, _ = np.polyfit(np.log(sizes), np.log(times), 1)
    return float(slope)


def scaling_run(
    spec: SynthSpec,
    fractions: list[float],
    cfg: Soe1Config,
    repeats: int = 3,
) -> BenchResult:
    """Time detection on row-prefixes of one generated dataset.

    Timing covers detect() only (generation and any I/O are excluded);
    each size reports the median of ``repeats`` runs.
    """
    if not fractions or any(not 0 < f <= 1 for f in fractions):
        raise UsageError("fractions must lie in (0, 1]")
    if list(fractions) != sorted(set(fractions)):
        raise UsageError("fractions must be strictly increasing")
    full = generate(spec)
    sizes, times = [], []
    for frac in fractions:
        m = max(1, round(frac * spec.rows))
        sub = full.head(m)
        runs = []
        for _ in range(repeats):
            start = time.perf_counter()
            detect(sub, cfg)
            runs.append(time.perf_counter() - start)
        sizes.append(m)
        times.append(statistics.median(runs))
    return BenchResult(
        name=spec.name,
        sizes=tuple(sizes),
        wall_times=tuple(times),
        slope=_fit_loglog_slope(sizes, times),
        threads=cfg.threads,
        axis="records",
    )


def dimension_scaling_run(
    spec: SynthSpec,
    attr_counts: list[int],
    cfg: Soe1Config,
    repeats: int = 3,
) -> BenchResult:
    """Time detection at a fixed row count while the attribute count grows."""
    if list(attr_counts) != sorted(set(attr_counts)) or attr_counts[0] < 1:
        raise UsageError("attr_counts must be strictly increasing positive integers")
    times = []
    for d in attr_counts:
        ds = generate(
            SynthSpec(
                rows=spec.rows,
                attrs=d,
                classes=spec.classes,
                seed=spec.seed,
                values_per_attr=spec.values_per_attr,
                class_skew=spec.class_skew,
            )
        )
        runs = []
        for _ in range(repeats):
            start = time.perf_counter()
            detect(ds, cfg)
            runs.append(time.perf_counter() - start)
        times.append(statistics.median(runs))
    return BenchResult(
        name=spec.name,
        sizes=tuple(attr_counts),
        wall_times=tuple(times),
        slope=_fit_loglog_slope(attr_counts, times),
        threads=cfg.threads,
        axis="attributes",
    )


def bench_tsv(result: BenchResult, total: int | None = None) -> str:
    """Plot-ready TSV: size, fraction of the full run, and seconds per size."""
    base = total if total is not None else result.sizes[-1]
    lines = [f"# {result.name} axis={result.axis} threads={result.threads}"]
    lines.append(f"{result.axis[:-1]}_count\tfraction\tseconds")
    for size, t in zip(result.sizes, result.wall_times):
        lines.append(f"{size}\t{size / base!r}\t{t!r}")
    if result.slope is not None:
        lines.append(f"# fitted log-log slope: {result.slope!r}")
    return "\n".join(lines) + "\n"
