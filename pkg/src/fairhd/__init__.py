"""Fairness-aware graph hyperdimensional computing for node classification."""

from .core import (
    PositionTable,
    bind,
    bundle,
    cosine_similarity,
    cyclic_shift,
    random_hypervector,
    sign_quantize,
)
from .data import (
    BinarizerSpec,
    ColumnSchema,
    GraphDataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    split,
)
from .encoding import EncodedGraph, encode_graph
from .evaluation import SweepSpec, evaluate, run_single, sweep, timing_benchmark
from .metrics import (
    FairnessReport,
    PredictionSet,
    compute_report,
    dp_gap_binary,
    dp_gap_multi,
    eo_gap,
    prule,
    utility,
)
from .training import ClassModel, TrainConfig, finalize, init_class_hvs, predict, train

__version__ = "0.1.0"
