import numpy as np
import pytest

from soe import Combiner, Soe1Config, SynthSpec, UsageError, generate, scaling_run
from soe.combiners import PRODUCT
from soe.soe1 import detect_with_stats
from soe.synthbench import bench_tsv, dimension_scaling_run


class TestGenerate:
    def test_ds1_shape(self):
        ds = generate(SynthSpec(rows=100_000, attrs=10, classes=10, seed=5))
        assert ds.n == 100_000
        assert ds.d == 11  # 10 attributes + class
        assert ds.schema.class_column == 10
        assert len(ds.schema.detection_attrs()) == 10
        observed_classes = set(ds.column(10).tolist())
        assert observed_classes <= set(range(10))

    def test_deterministic_for_fixed_seed(self):
        spec = SynthSpec(rows=2_000, attrs=5, classes=4, seed=5)
        a, b = generate(spec), generate(spec)
        for i in range(a.d):
            assert np.array_equal(a.column(i), b.column(i))

    def test_seed_changes_output(self):
        a = generate(SynthSpec(rows=500, attrs=3, classes=3, seed=5))
        b = generate(SynthSpec(rows=500, attrs=3, classes=3, seed=6))
        assert any(not np.array_equal(a.column(i), b.column(i)) for i in range(3))

    def test_zero_skew_marginals_uniform(self):
        # chi-square goodness of fit against uniform; critical value for
        # df = 9 at alpha = 0.01 is 21.666
        spec = SynthSpec(rows=50_000, attrs=4, classes=5, seed=5, class_skew=0.0)
        ds = generate(spec)
        v = spec.values_per_attr
        expected = spec.rows / v
        for attr in range(spec.attrs):
            counts = np.bincount(ds.column(attr), minlength=v)
            chi2 = float(((counts - expected) ** 2 / expected).sum())
            assert chi2 < 21.666

    def test_positive_skew_concentrates_mass(self):
        spec = SynthSpec(rows=20_000, attrs=3, classes=2, seed=5, class_skew=0.8)
        ds = generate(spec)
        counts = np.bincount(ds.column(0), minlength=10)
        assert counts.max() > 2 * spec.rows / 10

    def test_spec_validation(self):
        with pytest.raises(UsageError):
            SynthSpec(rows=0, attrs=1, classes=1)
        with pytest.raises(UsageError):
            SynthSpec(rows=3, attrs=1, classes=5)
        with pytest.raises(UsageError):
            SynthSpec(rows=10, attrs=1, classes=1, values_per_attr=1)
        with pytest.raises(UsageError):
            SynthSpec(rows=10, attrs=1, classes=1, class_skew=1.5)


class TestScalingRun:
    def cfg(self):
        return Soe1Config(k=10, combiner=Combiner(PRODUCT))

    def test_single_fraction_has_no_slope(self):
        spec = SynthSpec(rows=4_000, attrs=4, classes=4, seed=5)
        result = scaling_run(spec, [1.0], self.cfg(), repeats=1)
        assert result.slope is None
        assert result.sizes == (4_000,)

    def test_reports_sizes_and_times(self):
        spec = SynthSpec(rows=8_000, attrs=4, classes=4, seed=5)
        result = scaling_run(spec, [0.5, 1.0], self.cfg(), repeats=1)
        assert result.sizes == (4_000, 8_000)
        assert all(t > 0 for t in result.wall_times)
        assert result.slope is not None

    def test_bad_fractions(self):
        spec = SynthSpec(rows=100, attrs=2, classes=2, seed=5)
        with pytest.raises(UsageError):
            scaling_run(spec, [0.5, 0.5], self.cfg())
        with pytest.raises(UsageError):
            scaling_run(spec, [0.0, 1.0], self.cfg())
        with pytest.raises(UsageError):
            scaling_run(spec, [], self.cfg())

    def test_dimension_sweep(self):
        spec = SynthSpec(rows=2_000, attrs=4, classes=4, seed=5)
        result = dimension_scaling_run(spec, [2, 4], self.cfg(), repeats=1)
        assert result.axis == "attributes"
        assert result.sizes == (2, 4)

    def test_doubling_rows_roughly_doubles_time(self):
        # empirical wall-clock claim: allow a few attempts so a scheduler
        # hiccup on shared hardware cannot fail a correct implementation
        spec = SynthSpec(rows=100_000, attrs=10, classes=10, seed=5)
        cfg = Soe1Config(k=30, combiner=Combiner(PRODUCT))
        from soe.synthbench import generate
        from soe.soe1 import detect

        detect(generate(SynthSpec(rows=20_000, attrs=10, classes=10, seed=5)), cfg)
        ratios = []
        for _ in range(3):
            result = scaling_run(spec, [0.5, 1.0], cfg, repeats=5)
            ratio = result.wall_times[1] / result.wall_times[0]
            ratios.append(round(ratio, 2))
            if 1.6 <= ratio <= 2.6:
                return
        raise AssertionError(f"doubling ratio outside [1.6, 2.6] in 3 runs: {ratios}")

    def test_bench_tsv_format(self):
        spec = SynthSpec(rows=2_000, attrs=3, classes=3, seed=5)
        result = scaling_run(spec, [0.5, 1.0], self.cfg(), repeats=1)
        text = bench_tsv(result, total=spec.rows)
        lines = text.strip().splitlines()
        assert lines[1] == "record_count\tfraction\tseconds"
        assert lines[2].startswith("1000\t0.5\t")
        assert "slope" in lines[-1]


class TestMemoryContract:
    def test_auxiliary_entries_bounded(self):
        spec = SynthSpec(rows=30_000, attrs=8, classes=6, seed=5)
        ds = generate(spec)
        k = 25
        _res, stats = detect_with_stats(
            ds, Soe1Config(k=k, combiner=Combiner(PRODUCT))
        )
        d, p = 8, spec.values_per_attr
        assert stats.histogram_entries <= d * p
        assert stats.max_heap_entries <= k
