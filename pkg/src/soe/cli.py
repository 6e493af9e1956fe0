"""Command-line entry point: detect, framework, eval, synth, bench, fetch.

Machine output (TSV) goes to stdout; ``--pretty`` adds aligned
human-readable tables on stderr. Option values resolve in precedence
order: explicit flag > SOE_<NAME> environment variable > ``--config``
key=value file > built-in default.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from . import evalharness, framework, histogram, synthbench, uci
from .combiners import parse_combiner
from .dataset import Dataset, MissingPolicy, discretize_equal_width, load_csv
from .errors import DataError, SoeError, UsageError
from .soe1 import Polarity, Soe1Config, detect, explain, score_all
from .synthbench import SynthSpec


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def _fraction(text: str) -> Fraction:
    return Fraction(text.strip())


# Per-subcommand option registry: name -> (converter, default, help). The
# parser stores None for unset options; resolution falls back to env/config.
_SHARED = {
    "input": (str, None, "input CSV (header row required, UTF-8)"),
    "k": (int, None, "number of outliers to report (exclusive with --top-ratio)"),
    "top_ratio": (_fraction, None, "fraction of records to report, e.g. 0.05"),
    "operator": (str, "prod", "combiner: prod | sum | sq:<q> | sinf"),
    "polarity": (str, "frequency", "factor reading: frequency | rarity"),
    "missing_policy": (str, "special", "missing cells: special (own category) | ignore"),
    "missing_token": (str, "?", "token marking a missing cell"),
    "bins": (str, None, "equal-width binning: all=<B> or name=<B>[,name=<B>...]"),
    "class_col": (str, None, "class column name (excluded from detection)"),
    "log_space": (_bool, False, "compute the product as a sum of logs"),
    "threads": (int, 0, "worker threads; 0 = all cores; results match --threads 1"),
    "seed": (int, 5, "random seed"),
    "pretty": (_bool, False, "also print an aligned table on stderr"),
}


def _opts(*names: str, **extra) -> dict:
    table = {name: _SHARED[name] for name in names}
    table.update(extra)
    return table


_OPTIONS: dict[str, dict[str, tuple[Callable[[str], Any], Any, str]]] = {
    "detect": _opts(
        "input", "k", "top_ratio", "operator", "polarity", "missing_policy",
        "missing_token", "bins", "class_col", "log_space", "threads", "seed", "pretty",
        echo_rows=(_bool, False, "append the original CSV row to each result"),
        explain=(_bool, False, "append each result's per-attribute factor vector"),
        dump_histograms=(str, None, "write a (attribute, value, frequency) TSV here"),
    ),
    "framework": _opts(
        "input", "k", "top_ratio", "operator", "polarity", "missing_policy",
        "missing_token", "bins", "class_col", "log_space", "threads", "seed", "pretty",
        subspaces=(str, None, "subspace file (attribute names per line) or all:<maxdim>"),
        no_ensemble=(_bool, False, "emit one ranking per subspace, skipping fusion"),
        max_subspaces=(
            int, framework.DEFAULT_ENUMERATION_CAP,
            "refuse to enumerate more subspaces than this",
        ),
    ),
    "eval": _opts(
        "input", "class_col", "polarity", "missing_policy", "missing_token",
        "bins", "log_space", "threads", "seed", "pretty",
        rare=(str, None, "rare classes: label[,label...] or lt:<fraction>"),
        ratios=(str, "5,10,11,15,20", "top ratios in percent"),
        operators=(str, "prod,sum,sq:2,sq:5,sq:7,sinf", "combiners to sweep"),
        k_base=(int, None, "resolve ratios against this base instead of n"),
    ),
    "synth": {
        "rows": (int, None, "record count"),
        "attrs": (int, None, "attribute count (a class column is added)"),
        "classes": (int, None, "class count"),
        "seed": (int, 5, "generator seed"),
        "values_per_attr": (int, 10, "alphabet size per attribute"),
        "class_skew": (float, 0.5, "weight of the class-specific mode value"),
        "out": (str, None, "output CSV (default: stdout)"),
    },
    "bench": {
        "rows": (int, 100_000, "full dataset size"),
        "attrs": (int, 10, "attribute count"),
        "classes": (int, 10, "class count"),
        "seed": (int, 5, "generator seed"),
        "values_per_attr": (int, 10, "alphabet size per attribute"),
        "class_skew": (float, 0.5, "weight of the class-specific mode value"),
        "fractions": (str, "0.25,0.5,0.75,1.0", "row fractions to time"),
        "attr_sweep": (str, None, "also sweep these attribute counts at full rows"),
        "k": (int, 30, "outliers to report per timed run"),
        "operator": (str, "prod", "combiner under test"),
        "repeats": (int, 3, "timing repeats per size (median reported)"),
        "threads": (int, 0, "worker threads; 0 = all cores"),
        "plot_data": (str, None, "also write the TSV to this file"),
    },
    "fetch": {
        "dest": (str, None, "data directory (default: ./data or $SOE_DATA_DIR)"),
    },
}


class Resolver:
    """Flag > environment > config-file > default, per option."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.args = args
        self.config: dict[str, str] = {}
        if getattr(args, "config", None):
            self.config = _read_config(Path(args.config))

    def get(self, name: str) -> Any:
        conv, default, _help = _OPTIONS[self.command][name]
        explicit = getattr(self.args, name, None)
        if explicit is not None:
            return explicit
        env = os.environ.get("SOE_" + name.upper())
        if env is not None:
            return conv(env)
        if name in self.config:
            return conv(self.config[name])
        key_dashed = name.replace("_", "-")
        if key_dashed in self.config:
            return conv(self.config[key_dashed])
        return default


def _read_config(path: Path) -> dict[str, str]:
    if not path.exists():
        raise DataError(f"config file {path} does not exist")
    out: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {text!r}")
        key, _, value = text.partition("=")
        out[key.strip()] = value.strip().strip("\"'")
    return out


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="soe",
        description="Subspace outlier ensembles over categorical data: "
        "histogram-based top-k detection (detect), general subspace mining "
        "(framework), rare-class coverage evaluation (eval), synthetic data "
        "generation (synth), the scaling benchmark (bench), and evaluation "
        "dataset download (fetch).",
    )
    sub = parser.add_subparsers(dest="command", metavar="{detect,framework,eval,synth,bench,fetch}")

    def add(cmd: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(cmd, help=help_text, add_help=True)
        p.add_argument("--config", default=None, help="key=value option file")
        for name, (conv, _default, help_text) in _OPTIONS[cmd].items():
            flag = "--" + name.replace("_", "-")
            if conv is _bool:
                p.add_argument(
                    flag, dest=name, action="store_const", const=True,
                    default=None, help=help_text,
                )
            else:
                p.add_argument(
                    flag, dest=name, type=str if conv is _fraction else conv,
                    default=None, help=help_text,
                )
        return p

    add("detect", "rank the top-k outliers of a CSV by single-attribute frequencies")
    add("framework", "rank outliers over an explicit subspace set")
    add("eval", "sweep top ratios and report rare-class coverage per operator")
    add("synth", "generate a labeled synthetic categorical dataset")
    add("bench", "time detection across dataset sizes and report the scaling slope")
    add("fetch", "download and preprocess the UCI evaluation datasets")
    return parser


# -- shared loading ----------------------------------------------------------


def _parse_bins(spec: str | None) -> dict[str, int]:
    """Parse --bins: 'all=2' or 'a1=4,a7=8' -> {name_or_all: bin_count}."""
    if not spec:
        return {}
    out: dict[str, int] = {}
    for part in spec.split(","):
        name, sep, count = part.partition("=")
        if not sep:
            raise UsageError(f"--bins entries must look like name=B, got {part!r}")
        try:
            b = int(count)
        except ValueError:
            raise UsageError(f"--bins {part!r}: bin count must be an integer") from None
        if b < 1:
            raise UsageError(f"--bins {part!r}: bin count must be >= 1")
        out[name.strip()] = b
    return out


def _load_input(res: Resolver) -> Dataset:
    path = res.get("input")
    if not path:
        raise UsageError("--input is required")
    policy = MissingPolicy(res.get("missing_policy"))
    bins = _parse_bins(res.get("bins"))
    class_col = res.get("class_col")
    hints: dict[str, str] = {}
    if "all" in bins:
        # Every non-class column is numeric; resolve names from the header.
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh))
        for name in header:
            name = name.strip()
            if name != class_col:
                hints[name] = "numeric"
    for name in bins:
        if name != "all":
            hints[name] = "numeric"
    ds = load_csv(
        path,
        schema_hints=hints or None,
        missing_token=res.get("missing_token"),
        policy=policy,
        class_column=class_col,
    )
    default_b = bins.get("all")
    for attr, spec in enumerate(ds.schema.attributes):
        if spec.kind == "numeric" and not ds.is_discretized(attr):
            b = bins.get(spec.name, default_b)
            if b is None:
                raise UsageError(f"no bin count given for numeric column {spec.name!r}")
            ds = discretize_equal_width(ds, attr, b)
    return ds


def _threads(res: Resolver) -> int:
    t = res.get("threads")
    return t if t and t > 0 else (os.cpu_count() or 1)


def _soe1_config(res: Resolver) -> Soe1Config:
    k = res.get("k")
    ratio = res.get("top_ratio")
    if isinstance(ratio, str):
        ratio = _fraction(ratio)
    return Soe1Config(
        k=k,
        top_ratio=ratio,
        combiner=parse_combiner(res.get("operator")),
        policy=MissingPolicy(res.get("missing_policy")),
        polarity=Polarity(res.get("polarity")),
        log_space=res.get("log_space"),
        threads=_threads(res),
    )


def _echo_rows(path: str) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [row for row in reader]


def _pretty_table(header: list[str], rows: list[list[str]]) -> str:
    table = [header] + rows
    widths = [max(len(r[c]) for r in table) for c in range(len(header))]
    return (
        "\n".join(
            "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row))
            for row in table
        )
        + "\n"
    )


# -- subcommands -------------------------------------------------------------


def _cmd_detect(res: Resolver) -> int:
    ds = _load_input(res)
    cfg = _soe1_config(res)
    results = detect(ds, cfg)
    dump = res.get("dump_histograms")
    hs = None
    if dump or res.get("explain"):
        hs = histogram.build(ds, cfg.policy)
    if dump:
        Path(dump).write_text(histogram.dump_tsv(ds, hs), encoding="utf-8")
    echo = _echo_rows(res.get("input")) if res.get("echo_rows") else None
    header = ["rank", "record", "score"]
    if res.get("explain"):
        header.append("factors")
    if echo is not None:
        header.append("row")
    print("\t".join(header))
    rows = []
    for sr in results:
        cells = [str(sr.rank), str(sr.record), repr(sr.score)]
        if res.get("explain"):
            factors = explain(ds, hs, sr.record, cfg.polarity)
            cells.append(",".join("absent" if f is None else repr(f) for f in factors))
        if echo is not None:
            cells.append(",".join(echo[sr.record]))
        print("\t".join(cells))
        rows.append(cells)
    if res.get("pretty"):
        sys.stderr.write(_pretty_table(header, rows))
    return 0


def _parse_subspaces(res: Resolver, ds: Dataset) -> framework.SubspaceSet:
    spec = res.get("subspaces")
    if not spec:
        raise UsageError("--subspaces is required (file path or all:<maxdim>)")
    det_attrs = ds.schema.detection_attrs()
    if spec.startswith("all:"):
        try:
            max_dim = int(spec[4:])
        except ValueError:
            raise UsageError(f"bad subspace spec {spec!r}") from None
        enum = framework.enumerate_subspaces(
            len(det_attrs), max_dim, cap=res.get("max_subspaces")
        )
        mapped = tuple(
            framework.Subspace(tuple(det_attrs[i] for i in s.attrs))
            for s in enum.subspaces
        )
        return framework.SubspaceSet(subspaces=mapped)
    path = Path(spec)
    if not path.exists():
        raise DataError(f"subspace file {path} does not exist")
    subs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        names = [t.strip() for t in text.split(",")]
        try:
            attrs = tuple(ds.schema.index_of(nm) for nm in names)
        except UsageError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from None
        subs.append(framework.Subspace(attrs))
    if not subs:
        raise UsageError(f"{path}: no subspaces defined")
    return framework.SubspaceSet(subspaces=tuple(subs))


def _cmd_framework(res: Resolver) -> int:
    ds = _load_input(res)
    ss = _parse_subspaces(res, ds)
    cfg = _soe1_config(res)
    k = cfg.resolve_k(ds.n)
    polarity = cfg.polarity

    def subspace_names(s: framework.Subspace) -> str:
        return "+".join(ds.schema.attributes[a].name for a in s.attrs)

    if res.get("no_ensemble"):
        print("subspace\trank\trecord\tscore")
        for sub, ranking in framework.run_per_subspace(ds, ss, k, polarity):
            for sr in ranking:
                print(f"{subspace_names(sub)}\t{sr.rank}\t{sr.record}\t{sr.score!r}")
        return 0
    results = framework.run_framework(
        ds, ss, cfg.combiner, k, polarity, log_space=cfg.log_space, threads=cfg.threads
    )
    print("rank\trecord\tscore")
    rows = []
    for sr in results:
        print(f"{sr.rank}\t{sr.record}\t{sr.score!r}")
        rows.append([str(sr.rank), str(sr.record), repr(sr.score)])
    if res.get("pretty"):
        sys.stderr.write(_pretty_table(["rank", "record", "score"], rows))
    return 0


def _parse_rare(spec: str | None) -> evalharness.RareClassSpec:
    if not spec:
        raise UsageError("--rare is required (label list or lt:<fraction>)")
    if spec.startswith("lt:"):
        try:
            threshold = float(spec[3:])
        except ValueError:
            raise UsageError(f"bad rare threshold {spec!r}") from None
        return evalharness.RareClassSpec.under(threshold)
    labels = [t.strip() for t in spec.split(",") if t.strip()]
    if not labels:
        raise UsageError("--rare label list is empty")
    return evalharness.RareClassSpec.explicit(*labels)


def _cmd_eval(res: Resolver) -> int:
    if not res.get("class_col"):
        raise UsageError("--class-col is required for eval")
    ds = _load_input(res)
    rare = evalharness.label_rare(ds, _parse_rare(res.get("rare")))
    ratios = [Fraction(t.strip()) / 100 for t in str(res.get("ratios")).split(",") if t.strip()]
    operators = [t.strip() for t in str(res.get("operators")).split(",") if t.strip()]
    polarity = Polarity(res.get("polarity"))
    tables: dict[str, list[evalharness.CoverageRow]] = {}
    for op in operators:
        cfg = Soe1Config(
            k=1,
            combiner=parse_combiner(op),
            policy=MissingPolicy(res.get("missing_policy")),
            polarity=polarity,
            log_space=res.get("log_space"),
            threads=_threads(res),
        )
        ranking = score_all(ds, cfg)
        tables[op] = evalharness.coverage_table(
            ranking, rare, ratios, k_base=res.get("k_base")
        )
    sys.stdout.write(evalharness.coverage_tsv(tables))
    if res.get("pretty"):
        sys.stderr.write(evalharness.compare_report(tables))
    return 0


def _cmd_synth(res: Resolver) -> int:
    for required in ("rows", "attrs", "classes"):
        if res.get(required) is None:
            raise UsageError(f"--{required} is required")
    spec = SynthSpec(
        rows=res.get("rows"),
        attrs=res.get("attrs"),
        classes=res.get("classes"),
        seed=res.get("seed"),
        values_per_attr=res.get("values_per_attr"),
        class_skew=res.get("class_skew"),
    )
    ds = synthbench.generate(spec)
    decoded = [ds.decode_column(i) for i in range(ds.d)]
    header = [a.name for a in ds.schema.attributes]
    out = res.get("out")
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(zip(*decoded))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(zip(*decoded))
    return 0


def _cmd_bench(res: Resolver) -> int:
    spec = SynthSpec(
        rows=res.get("rows"),
        attrs=res.get("attrs"),
        classes=res.get("classes"),
        seed=res.get("seed"),
        values_per_attr=res.get("values_per_attr"),
        class_skew=res.get("class_skew"),
    )
    cfg = Soe1Config(
        k=res.get("k"),
        combiner=parse_combiner(res.get("operator")),
        threads=_threads(res),
    )
    fractions = [float(t) for t in str(res.get("fractions")).split(",") if t.strip()]
    result = synthbench.scaling_run(spec, fractions, cfg, repeats=res.get("repeats"))
    text = synthbench.bench_tsv(result, total=spec.rows)
    sys.stdout.write(text)
    sweep = res.get("attr_sweep")
    if sweep:
        counts = [int(t) for t in sweep.split(",") if t.strip()]
        dresult = synthbench.dimension_scaling_run(spec, counts, cfg, repeats=res.get("repeats"))
        dtext = synthbench.bench_tsv(dresult, total=counts[-1])
        sys.stdout.write(dtext)
        text += dtext
    plot = res.get("plot_data")
    if plot:
        Path(plot).write_text(text, encoding="utf-8")
    return 0


def _cmd_fetch(res: Resolver) -> int:
    paths = uci.fetch_all(Path(res.get("dest")) if res.get("dest") else None)
    for name, path in paths.items():
        print(f"{name}\t{path}")
    return 0


_HANDLERS = {
    "detect": _cmd_detect,
    "framework": _cmd_framework,
    "eval": _cmd_eval,
    "synth": _cmd_synth,
    "bench": _cmd_bench,
    "fetch": _cmd_fetch,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help()
            return 1
        return _HANDLERS[args.command](Resolver(args.command, args))
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"soe: usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"soe: data error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0
    except SoeError as exc:
        print(f"soe: error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"soe: internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
