"""Subspace outlier ensembles for categorical and discretized data."""

from .combiners import Combiner, combine, parse_combiner
from .dataset import (
    ABSENT,
    AttributeSpec,
    Dataset,
    MissingPolicy,
    Schema,
    discretize_equal_width,
    load_csv,
    project,
)
from .errors import DataError, EmptyFactorVectorError, SoeError, UsageError
from .evalharness import CoverageRow, RareClassSpec, coverage_table, label_rare
from .framework import (
    JointFrequencyDetector,
    Subspace,
    SubspaceSet,
    enumerate_subspaces,
    joint_frequency_factor,
    run_framework,
)
from .histogram import Histogram, HistogramSet, build, frequency, merge
from .ratios import resolve_k
from .soe1 import (
    Polarity,
    ScoredRecord,
    Soe1Config,
    detect,
    detect_with_stats,
    score_all,
    subspace_factor,
)
from .synthbench import BenchResult, SynthSpec, generate, scaling_run

__version__ = "0.1.0"

__all__ = [
    "ABSENT",
    "AttributeSpec",
    "BenchResult",
    "Combiner",
    "CoverageRow",
    "DataError",
    "Dataset",
    "EmptyFactorVectorError",
    "Histogram",
    "HistogramSet",
    "JointFrequencyDetector",
    "MissingPolicy",
    "Polarity",
    "RareClassSpec",
    "Schema",
    "ScoredRecord",
    "Soe1Config",
    "SoeError",
    "Subspace",
    "SubspaceSet",
    "SynthSpec",
    "UsageError",
    "build",
    "combine",
    "coverage_table",
    "detect",
    "detect_with_stats",
    "discretize_equal_width",
    "enumerate_subspaces",
    "frequency",
    "generate",
    "joint_frequency_factor",
    "label_rare",
    "load_csv",
    "merge",
    "parse_combiner",
    "project",
    "resolve_k",
    "run_framework",
    "scaling_run",
    "score_all",
    "subspace_factor",
]
