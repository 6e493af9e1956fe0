"""Columnar categorical datasets: loading, value interning, and equal-width binning.

A Dataset stores one integer column per attribute. Categorical cells hold
value ids that index the attribute's value table (tokens interned in
first-occurrence order, so ids are reproducible across runs). Numeric
columns hold raw floats until `discretize_equal_width` replaces them with
bin ids.

Missing cells follow one of two policies, fixed per dataset:

* ``special``: the missing token is interned like any other category.
* ``ignore``: the cell is stored as ABSENT (-1) and excluded from
  histograms and score combination.

Constructed datasets are immutable (arrays are read-only); row subsets and
discretized variants are new objects sharing value tables. Column access
is instrumented with a cell-read counter so scan-count contracts can be
asserted by tests.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, UsageError

#: Cell marker for a missing value under MissingPolicy.IGNORE.
ABSENT = -1


class MissingPolicy(str, Enum):
    """How missing cells are treated. Exactly one mode is active per run."""

    SPECIAL = "special"  # missing token becomes its own category
    IGNORE = "ignore"  # missing cells are absent from histograms and scores


@dataclass(frozen=True)
class AttributeSpec:
    """Metadata for one attribute.

    ``bin_count`` and the observed range are only meaningful for numeric
    attributes; the observed range is captured at load time (ignoring
    missing cells) and retained after discretization for provenance.
    """

    name: str
    kind: str = "categorical"  # "categorical" | "numeric"
    bin_count: int | None = None
    observed_min: float | None = None
    observed_max: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("categorical", "numeric"):
            raise UsageError(f"unknown attribute kind {self.kind!r}")
        if self.bin_count is not None and self.bin_count < 1:
            raise UsageError(f"bin_count must be >= 1, got {self.bin_count}")


@dataclass(frozen=True)
class Schema:
    """Ordered attribute list plus the optional class column.

    The class column is never part of detection; it exists only for the
    evaluation harness.
    """

    attributes: tuple[AttributeSpec, ...]
    class_column: int | None = None

    def __post_init__(self) -> None:
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise DataError("attribute names must be unique")
        if self.class_column is not None and not (
            0 <= self.class_column < len(self.attributes)
        ):
            raise UsageError(f"class_column {self.class_column} out of range")

    @property
    def d(self) -> int:
        return len(self.attributes)

    def detection_attrs(self) -> tuple[int, ...]:
        """Indices of the attributes that participate in detection."""
        return tuple(
            i for i in range(self.d) if i != self.class_column
        )

    def index_of(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise UsageError(f"no attribute named {name!r}")


class Dataset:
    """Immutable columnar table of interned categorical values.

    Use :func:`load_csv`, :meth:`from_tokens`, or :meth:`from_ids` to build
    one. ``column(i)`` is the only way to get at the data arrays and counts
    toward the cell-read instrumentation.
    """

    def __init__(
        self,
        schema: Schema,
        columns: Sequence[np.ndarray],
        value_tables: Sequence[tuple[str, ...] | None],
        policy: MissingPolicy,
        missing_token: str = "?",
    ) -> None:
        if len(columns) != schema.d or len(value_tables) != schema.d:
            raise DataError("column/value-table count does not match schema")
        lengths = {len(c) for c in columns}
        if len(lengths) > 1:
            raise DataError(f"columns have differing lengths: {sorted(lengths)}")
        self.schema = schema
        self.n = len(columns[0]) if columns else 0
        self.missing_policy = policy
        self.missing_token = missing_token
        self._columns = []
        for col in columns:
            arr = np.asarray(col)
            arr.setflags(write=False)
            self._columns.append(arr)
        self._value_tables = [tuple(vt) if vt is not None else None for vt in value_tables]
        self._cell_reads = 0
        self._validate()

    def _validate(self) -> None:
        for i, spec in enumerate(self.schema.attributes):
            col = self._columns[i]
            vt = self._value_tables[i]
            if vt is None:
                if not np.issubdtype(col.dtype, np.floating):
                    raise DataError(f"attribute {spec.name!r}: raw numeric column must be float")
                continue
            if not np.issubdtype(col.dtype, np.integer):
                raise DataError(f"attribute {spec.name!r}: categorical column must be integer")
            if col.size:
                lo = int(col.min())
                if lo < 0:
                    if self.missing_policy is not MissingPolicy.IGNORE or lo < ABSENT:
                        raise DataError(
                            f"attribute {spec.name!r}: negative value id under "
                            f"policy={self.missing_policy.value}"
                        )
                if int(col.max()) >= len(vt):
                    raise DataError(f"attribute {spec.name!r}: value id exceeds value table")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_tokens(
        cls,
        columns: Mapping[str, Sequence[str]],
        class_column: str | None = None,
        policy: MissingPolicy = MissingPolicy.SPECIAL,
        missing_token: str = "?",
    ) -> "Dataset":
        """Build a dataset from in-memory token columns (all categorical)."""
        names = list(columns)
        rows = {len(v) for v in columns.values()}
        if len(rows) != 1:
            raise DataError("token columns must all have the same length")
        class_idx = names.index(class_column) if class_column is not None else None
        ids, tables = [], []
        for name in names:
            col_ids, table = _intern(columns[name], missing_token, policy)
            ids.append(col_ids)
            tables.append(table)
        schema = Schema(
            tuple(AttributeSpec(name=n) for n in names), class_column=class_idx
        )
        return cls(schema, ids, tables, policy, missing_token)

    @classmethod
    def from_ids(
        cls,
        schema: Schema,
        columns: Sequence[np.ndarray],
        value_tables: Sequence[Sequence[str]],
        policy: MissingPolicy = MissingPolicy.SPECIAL,
        missing_token: str = "?",
    ) -> "Dataset":
        """Build a dataset directly from value-id arrays (no interning pass)."""
        return cls(schema, columns, [tuple(vt) for vt in value_tables], policy, missing_token)

    # -- access ------------------------------------------------------------

    @property
    def d(self) -> int:
        return self.schema.d

    def column(self, attr: int) -> np.ndarray:
        """Return attribute ``attr``'s full column; counts n cell reads."""
        if not 0 <= attr < self.d:
            raise IndexError(f"attribute index {attr} out of range")
        self._cell_reads += self.n
        return self._columns[attr]

    def value_table(self, attr: int) -> tuple[str, ...]:
        vt = self._value_tables[attr]
        if vt is None:
            raise UsageError(
                f"attribute {self.schema.attributes[attr].name!r} is numeric and "
                "not yet discretized"
            )
        return vt

    def is_discretized(self, attr: int) -> bool:
        """True when the attribute holds value ids (categorical or binned)."""
        return self._value_tables[attr] is not None

    def missing_id(self, attr: int) -> int | None:
        """Value id of the missing token under the special policy, if present."""
        if self.missing_policy is not MissingPolicy.SPECIAL:
            return None
        vt = self._value_tables[attr]
        if vt is None:
            return None
        try:
            return vt.index(self.missing_token)
        except ValueError:
            return None

    def decode(self, attr: int, value_id: int) -> str:
        """Map a value id back to its original token."""
        if value_id == ABSENT:
            return self.missing_token
        return self.value_table(attr)[value_id]

    def decode_column(self, attr: int) -> list[str]:
        vt = self.value_table(attr)
        col = self.column(attr)
        return [self.missing_token if v == ABSENT else vt[v] for v in col]

    # -- instrumentation ----------------------------------------------------

    @property
    def cell_reads(self) -> int:
        return self._cell_reads

    def reset_cell_reads(self) -> None:
        self._cell_reads = 0

    def record_reads(self, attrs: Sequence[int] | None = None) -> float:
        """Cell reads expressed as equivalent full-record scans.

        One record read = one visit to every counted attribute of a record.
        """
        count = len(attrs) if attrs is not None else len(self.schema.detection_attrs())
        if count == 0:
            return 0.0
        return self._cell_reads / count

    # -- derived datasets ----------------------------------------------------

    def select_rows(self, rows: slice | Sequence[int] | np.ndarray) -> "Dataset":
        """New dataset restricted to the given rows (value tables shared)."""
        cols = [c[rows] for c in self._columns]
        ds = Dataset.__new__(Dataset)
        ds.schema = self.schema
        ds.missing_policy = self.missing_policy
        ds.missing_token = self.missing_token
        ds._columns = []
        for col in cols:
            arr = np.ascontiguousarray(col)
            arr.setflags(write=False)
            ds._columns.append(arr)
        ds.n = len(ds._columns[0]) if ds._columns else 0
        ds._value_tables = list(self._value_tables)
        ds._cell_reads = 0
        return ds

    def head(self, m: int) -> "Dataset":
        return self.select_rows(slice(0, m))


def _intern(
    tokens: Iterable[str], missing_token: str, policy: MissingPolicy
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Intern a token column into value ids, assigned in first-occurrence order."""
    table: dict[str, int] = {}
    ids = []
    for tok in tokens:
        if tok == missing_token and policy is MissingPolicy.IGNORE:
            ids.append(ABSENT)
            continue
        vid = table.get(tok)
        if vid is None:
            vid = len(table)
            table[tok] = vid
        ids.append(vid)
    return np.asarray(ids, dtype=np.int64), tuple(table)


def load_csv(
    path: str | Path,
    schema_hints: Mapping[str | int, str] | None = None,
    missing_token: str = "?",
    policy: MissingPolicy = MissingPolicy.SPECIAL,
    class_column: str | int | None = None,
) -> Dataset:
    """Load a header-first CSV into a columnar dataset.

    ``schema_hints`` maps a column name or index to ``"numeric"`` or
    ``"categorical"``; unhinted columns are categorical. Numeric columns
    keep raw floats until :func:`discretize_equal_width` is applied.

    Raises DataError for ragged rows (with the offending row number),
    empty files, and hints that name unknown columns.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        width = len(header)
        raw_columns: list[list[str]] = [[] for _ in range(width)]
        for rownum, row in enumerate(reader, start=2):
            if len(row) != width:
                raise DataError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {width}"
                )
            for i, tok in enumerate(row):
                raw_columns[i].append(tok.strip())
    if not raw_columns or not raw_columns[0]:
        raise DataError(f"{path}: no data rows")

    kinds = ["categorical"] * width
    if schema_hints:
        for key, kind in schema_hints.items():
            if isinstance(key, int):
                if not 0 <= key < width:
                    raise DataError(f"schema hint index {key} out of range for {width} columns")
                idx = key
            else:
                if key not in header:
                    raise DataError(f"schema hint names unknown column {key!r}")
                idx = header.index(key)
            if kind not in ("categorical", "numeric"):
                raise UsageError(f"schema hint for {key!r}: unknown kind {kind!r}")
            kinds[idx] = kind

    class_idx: int | None = None
    if class_column is not None:
        if isinstance(class_column, int):
            if not 0 <= class_column < width:
                raise UsageError(f"class column index {class_column} out of range")
            class_idx = class_column
        else:
            if class_column not in header:
                raise DataError(f"class column {class_column!r} not in header")
            class_idx = header.index(class_column)
        kinds[class_idx] = "categorical"

    columns: list[np.ndarray] = []
    tables: list[tuple[str, ...] | None] = []
    specs: list[AttributeSpec] = []
    for i, name in enumerate(header):
        if kinds[i] == "numeric":
            vals = np.empty(len(raw_columns[i]), dtype=np.float64)
            for r, tok in enumerate(raw_columns[i]):
                if tok == missing_token:
                    vals[r] = math.nan
                    continue
                try:
                    vals[r] = float(tok)
                except ValueError:
                    raise DataError(
                        f"{path}: row {r + 2}, column {name!r}: {tok!r} is not numeric"
                    ) from None
            finite = vals[~np.isnan(vals)]
            lo = float(finite.min()) if finite.size else None
            hi = float(finite.max()) if finite.size else None
            specs.append(
                AttributeSpec(name=name, kind="numeric", observed_min=lo, observed_max=hi)
            )
            columns.append(vals)
            tables.append(None)
        else:
            ids, table = _intern(raw_columns[i], missing_token, policy)
            specs.append(AttributeSpec(name=name))
            columns.append(ids)
            tables.append(table)

    schema = Schema(tuple(specs), class_column=class_idx)
    return Dataset(schema, columns, tables, policy, missing_token)


def discretize_equal_width(ds: Dataset, attr: int, bin_count: int) -> Dataset:
    """Replace a numeric attribute with equal-width bin ids 0..bin_count-1.

    A value v maps to floor((v - min) * bin_count / (max - min)); v == max
    is clamped into the top bin, and a constant column collapses into bin 0.
    Missing cells follow the dataset's policy: an extra missing category
    under ``special``, ABSENT under ``ignore``.
    """
    if not 0 <= attr < ds.d:
        raise IndexError(f"attribute index {attr} out of range")
    spec = ds.schema.attributes[attr]
    if spec.kind != "numeric" or ds.is_discretized(attr):
        raise UsageError(f"attribute {spec.name!r} is not an undiscretized numeric column")
    if bin_count < 1:
        raise UsageError(f"bin_count must be >= 1, got {bin_count}")

    raw = ds.column(attr)
    missing = np.isnan(raw)
    lo, hi = spec.observed_min, spec.observed_max
    bins = np.zeros(ds.n, dtype=np.int64)
    if lo is not None and hi is not None and hi > lo:
        scaled = np.floor((raw - lo) * bin_count / (hi - lo))
        # v == max lands on bin_count; fold it (and any float spill) back in.
        with np.errstate(invalid="ignore"):
            bins = np.clip(scaled, 0, bin_count - 1)
        bins = np.where(missing, 0, bins).astype(np.int64)

    table = [str(b) for b in range(bin_count)]
    if missing.any():
        if ds.missing_policy is MissingPolicy.SPECIAL:
            table.append(ds.missing_token)
            bins[missing] = bin_count
        else:
            bins[missing] = ABSENT

    new_spec = replace(
        spec, kind="categorical", bin_count=bin_count
    )
    specs = list(ds.schema.attributes)
    specs[attr] = new_spec
    columns = [ds._columns[i] if i != attr else bins for i in range(ds.d)]
    tables = [ds._value_tables[i] if i != attr else tuple(table) for i in range(ds.d)]
    return Dataset(
        Schema(tuple(specs), class_column=ds.schema.class_column),
        columns,
        tables,
        ds.missing_policy,
        ds.missing_token,
    )


def project(ds: Dataset, record: int, subspace: Sequence[int]) -> tuple[int, ...]:
    """The record's value ids restricted to the subspace attributes, in order."""
    if not 0 <= record < ds.n:
        raise IndexError(f"record index {record} out of range")
    out = []
    for attr in subspace:
        if not 0 <= attr < ds.d:
            raise IndexError(f"attribute index {attr} out of range")
        if not ds.is_discretized(attr):
            raise UsageError(
                f"attribute {ds.schema.attributes[attr].name!r} is not discretized"
            )
        out.append(int(ds._columns[attr][record]))
    ds._cell_reads += len(out)
    return tuple(out)
