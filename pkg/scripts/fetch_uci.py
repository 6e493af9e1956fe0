#!/usr/bin/env python3
"""Download and preprocess the three UCI evaluation datasets.

Equivalent to `soe fetch`. Needs network access to archive.ics.uci.edu;
writes prepared CSVs into ./data (or --dest / $SOE_DATA_DIR).
"""

import argparse
import sys
from pathlib import Path

from soe import uci
from soe.errors import DataError


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default=None, help="output directory (default: ./data)")
    args = parser.parse_args()
    try:
        paths = uci.fetch_all(Path(args.dest) if args.dest else None)
    except DataError as exc:
        print(f"fetch failed: {exc}", file=sys.stderr)
        return 2
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
