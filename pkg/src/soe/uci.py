"""Fetch and preprocess the three UCI evaluation datasets.

Raw files are downloaded from the UCI repository (never vendored) and
rewritten as header-first CSVs under the data directory:

* ``lymphography.csv``: 148 records, 18 categorical attributes; the class
  code (1..4) moves from the first raw column into a ``class`` column.
* ``wisconsin_reduced.csv``: the 9-attribute breast cancer data reduced to
  an unbalanced 444 benign / 39 malignant split: the sample-id column is
  dropped, the 16 records containing missing cells are removed, and every
  sixth malignant record (in file order) of the remaining 239 is kept.
  Class tokens are mapped 2 -> benign, 4 -> malignant.
* ``arrhythmia.csv``: 452 records, 279 attributes plus a ``class`` column;
  missing cells keep the ``?`` token.

Each preparation step asserts the expected record counts, so a silently
truncated download fails loudly.
"""

from __future__ import annotations

import csv
import os
import urllib.error
import urllib.request
from pathlib import Path

from .errors import DataError

_UCI_BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES: dict[str, list[str]] = {
    "lymphography.data": [
        f"{_UCI_BASE}/lymphography/lymphography.data",
    ],
    "breast-cancer-wisconsin.data": [
        f"{_UCI_BASE}/breast-cancer-wisconsin/breast-cancer-wisconsin.data",
    ],
    "arrhythmia.data": [
        f"{_UCI_BASE}/arrhythmia/arrhythmia.data",
    ],
}

LYMPHOGRAPHY_CSV = "lymphography.csv"
WISCONSIN_CSV = "wisconsin_reduced.csv"
ARRHYTHMIA_CSV = "arrhythmia.csv"


def data_dir(override: str | Path | None = None) -> Path:
    """Data directory: explicit override, then $SOE_DATA_DIR, then ./data."""
    if override is not None:
        return Path(override)
    env = os.environ.get("SOE_DATA_DIR")
    return Path(env) if env else Path("data")


def download(name: str, dest_dir: Path, timeout: float = 60.0) -> Path:
    """Download one raw UCI file (skipped when already present)."""
    dest = dest_dir / name
    if dest.exists() and dest.stat().st_size > 0:
        return dest
    dest_dir.mkdir(parents=True, exist_ok=True)
    errors = []
    for url in SOURCES[name]:
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                payload = resp.read()
            dest.write_bytes(payload)
            return dest
        except (urllib.error.URLError, OSError) as exc:
            errors.append(f"{url}: {exc}")
    raise DataError(
        f"could not download {name}; this machine may lack network access to "
        "the UCI repository. Tried:\n  " + "\n  ".join(errors)
    )


def _read_rows(path: Path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def prepare_lymphography(raw: Path, out: Path) -> Path:
    rows = _read_rows(raw)
    if len(rows) != 148 or any(len(r) != 19 for r in rows):
        raise DataError(f"{raw}: expected 148 rows x 19 columns")
    header = ["class"] + [f"a{i}" for i in range(1, 19)]
    _write_csv(out, header, rows)
    return out


def prepare_wisconsin(raw: Path, out: Path) -> Path:
    rows = _read_rows(raw)
    if len(rows) != 699 or any(len(r) != 11 for r in rows):
        raise DataError(f"{raw}: expected 699 rows x 11 columns")
    complete = [r[1:] for r in rows if "?" not in r]  # drop sample id + incomplete rows
    if len(complete) != 683:
        raise DataError(f"{raw}: expected 683 complete records, got {len(complete)}")
    kept: list[list[str]] = []
    malignant_seen = 0
    for r in complete:
        label = r[-1]
        if label == "2":
            kept.append(r[:-1] + ["benign"])
        elif label == "4":
            malignant_seen += 1
            if malignant_seen % 6 == 0:
                kept.append(r[:-1] + ["malignant"])
        else:
            raise DataError(f"{raw}: unexpected class label {label!r}")
    n_mal = sum(1 for r in kept if r[-1] == "malignant")
    if len(kept) != 483 or n_mal != 39:
        raise DataError(
            f"{raw}: reduction produced {len(kept)} rows with {n_mal} malignant, "
            "expected 483 and 39"
        )
    header = [f"a{i}" for i in range(1, 10)] + ["class"]
    _write_csv(out, header, kept)
    return out


def prepare_arrhythmia(raw: Path, out: Path) -> Path:
    rows = _read_rows(raw)
    if len(rows) != 452 or any(len(r) != 280 for r in rows):
        raise DataError(f"{raw}: expected 452 rows x 280 columns")
    header = [f"a{i}" for i in range(1, 280)] + ["class"]
    _write_csv(out, header, rows)
    return out


def load_lymphography(dest: Path | None = None):
    """148 records, 18 categorical attributes, class codes 1..4."""
    from .dataset import load_csv

    ds = load_csv(data_dir(dest) / LYMPHOGRAPHY_CSV, class_column="class")
    if ds.n != 148 or len(ds.schema.detection_attrs()) != 18:
        raise DataError("unexpected lymphography shape; re-run the fetch")
    return ds


def load_wisconsin(dest: Path | None = None):
    """483 records (444 benign / 39 malignant), 9 categorical attributes."""
    from .dataset import load_csv

    ds = load_csv(data_dir(dest) / WISCONSIN_CSV, class_column="class")
    if ds.n != 483 or len(ds.schema.detection_attrs()) != 9:
        raise DataError("unexpected wisconsin shape; re-run the fetch")
    return ds


def load_arrhythmia(dest: Path | None = None, bins: int = 2):
    """452 records, 279 attributes equal-width binned, class codes 1..16.

    Every non-class column is treated as numeric and binned; missing cells
    become their own category under the special policy.
    """
    from .dataset import MissingPolicy, discretize_equal_width, load_csv

    path = data_dir(dest) / ARRHYTHMIA_CSV
    hints = {f"a{i}": "numeric" for i in range(1, 280)}
    ds = load_csv(
        path, schema_hints=hints, policy=MissingPolicy.SPECIAL, class_column="class"
    )
    if ds.n != 452 or len(ds.schema.detection_attrs()) != 279:
        raise DataError("unexpected arrhythmia shape; re-run the fetch")
    for attr in ds.schema.detection_attrs():
        ds = discretize_equal_width(ds, attr, bins)
    return ds


def fetch_all(dest: Path | None = None) -> dict[str, Path]:
    """Download and prepare every evaluation dataset; returns the CSV paths."""
    dd = data_dir(dest)
    dd.mkdir(parents=True, exist_ok=True)
    raw_dir = dd / "raw"
    out = {}
    raw = download("lymphography.data", raw_dir)
    out["lymphography"] = prepare_lymphography(raw, dd / LYMPHOGRAPHY_CSV)
    raw = download("breast-cancer-wisconsin.data", raw_dir)
    out["wisconsin"] = prepare_wisconsin(raw, dd / WISCONSIN_CSV)
    raw = download("arrhythmia.data", raw_dir)
    out["arrhythmia"] = prepare_arrhythmia(raw, dd / ARRHYTHMIA_CSV)
    return out
