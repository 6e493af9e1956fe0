#!/usr/bin/env python3
"""Scaling benchmark: detect wall time vs record count and attribute count.

Generates DS1..DS4-shaped synthetic datasets (100k rows; 10/20/30/40
attributes and classes) and times detection on row prefixes, reporting the
fitted log-log slope per dataset. Absolute times are hardware-bound; the
claim under test is the linear shape (slope near 1).
"""

import argparse
import sys

from soe import Combiner, Soe1Config, SynthSpec
from soe.combiners import PRODUCT
from soe.synthbench import bench_tsv, dimension_scaling_run, scaling_run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=100_000)
    parser.add_argument("--k", type=int, default=30)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument(
        "--fractions", default="0.2,0.4,0.6,0.8,1.0",
        help="comma-separated row fractions",
    )
    parser.add_argument("--out", default=None, help="write TSV here as well")
    args = parser.parse_args()

    fractions = [float(t) for t in args.fractions.split(",") if t.strip()]
    cfg = Soe1Config(k=args.k, combiner=Combiner(PRODUCT), threads=args.threads)
    chunks = []
    for shape in (10, 20, 30, 40):
        spec = SynthSpec(
            rows=args.rows, attrs=shape, classes=shape, seed=args.seed
        )
        result = scaling_run(spec, fractions, cfg, repeats=args.repeats)
        chunks.append(bench_tsv(result, total=args.rows))
    dims = dimension_scaling_run(
        SynthSpec(rows=args.rows, attrs=10, classes=10, seed=args.seed),
        [10, 20, 30, 40],
        cfg,
        repeats=args.repeats,
    )
    chunks.append(bench_tsv(dims, total=40))
    text = "".join(chunks)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
