"""Dataset ingestion, feature binarization, splitting, and synthetic graphs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.sparse as sp

from .core import STAGE_SPLIT, STAGE_SYNTH, derive_rng
from .errors import (
    GraphIntegrityError,
    ParseError,
    SchemaError,
    SplitError,
    SyntheticSpecError,
)

TRAIN = 0
TEST = 1


@dataclass
class GraphDataset:
    """An attributed graph with binary features, labels, groups, and split tags.

    Neighbor lists are sorted, deduplicated, self-loop free, and undirected
    (every edge appears in both endpoint lists).
    """

    num_nodes: int
    neighbor_lists: list  # list of sorted np.int64 arrays
    features_binary: np.ndarray  # (N, M) uint8 in {0, 1}
    labels: np.ndarray  # (N,) int64 in {0..C-1}
    sensitive: np.ndarray  # (N,) int64 in {0..k-1}
    split: np.ndarray  # (N,) int8, TRAIN or TEST
    _adjacency: sp.csr_matrix = field(default=None, repr=False, compare=False)

    @property
    def num_features(self):
        return self.features_binary.shape[1]

    @property
    def num_classes(self):
        return int(self.labels.max()) + 1

    @property
    def num_groups(self):
        return int(self.sensitive.max()) + 1

    def train_mask(self):
        return self.split == TRAIN

    def test_mask(self):
        return self.split == TEST

    def adjacency(self):
        """Unweighted adjacency as CSR (cached)."""
        if self._adjacency is None:
            indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
            for i, nbrs in enumerate(self.neighbor_lists):
                indptr[i + 1] = indptr[i] + len(nbrs)
            indices = (
                np.concatenate(self.neighbor_lists)
                if indptr[-1] > 0
                else np.zeros(0, dtype=np.int64)
            )
            data = np.ones(indptr[-1], dtype=np.int64)
            self._adjacency = sp.csr_matrix(
                (data, indices, indptr), shape=(self.num_nodes, self.num_nodes)
            )
        return self._adjacency

    def validate(self):
        n = self.num_nodes
        if len(self.neighbor_lists) != n:
            raise GraphIntegrityError("neighbor list count != num_nodes")
        for i, nbrs in enumerate(self.neighbor_lists):
            if len(nbrs) and (nbrs.min() < 0 or nbrs.max() >= n):
                raise GraphIntegrityError(f"node {i}: neighbor index out of range")
            if np.any(nbrs == i):
                raise GraphIntegrityError(f"node {i}: self-loop present")
            if len(nbrs) > 1 and np.any(np.diff(nbrs) <= 0):
                raise GraphIntegrityError(f"node {i}: neighbors not sorted/deduplicated")
        for name, arr in (
            ("features_binary", self.features_binary),
            ("labels", self.labels),
            ("sensitive", self.sensitive),
            ("split", self.split),
        ):
            if arr.shape[0] != n:
                raise SchemaError(f"{name} has {arr.shape[0]} rows, expected {n}")
        if not np.isin(self.features_binary, (0, 1)).all():
            raise SchemaError("features_binary must be 0/1")


@dataclass
class IngestionReport:
    """Bookkeeping emitted while building a GraphDataset."""

    num_nodes: int = 0
    num_edges: int = 0
    dropped_self_loops: int = 0
    dropped_duplicate_edges: int = 0
    class_group_counts: dict = field(default_factory=dict)  # (class, group) -> count

    def tally_groups(self, labels, sensitive):
        pairs, counts = np.unique(
            np.stack([labels, sensitive], axis=1), axis=0, return_counts=True
        )
        self.class_group_counts = {
            (int(c), int(g)): int(n) for (c, g), n in zip(pairs, counts)
        }


def build_neighbor_lists(num_nodes, src, dst):
    """Undirected neighbor lists from edge endpoint arrays.

    Self-loops and duplicate edges are dropped; returns (lists, report counts).
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if len(src) and (
        min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= num_nodes
    ):
        bad = np.flatnonzero((src < 0) | (src >= num_nodes) | (dst < 0) | (dst >= num_nodes))[0]
        raise GraphIntegrityError(
            f"edge {bad} ({src[bad]}, {dst[bad]}) references a node outside [0, {num_nodes})"
        )
    self_loops = int(np.sum(src == dst))
    keep = src != dst
    src, dst = src[keep], dst[keep]
    # Canonical order, then dedupe.
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(lo) else np.zeros((0, 2), np.int64)
    duplicates = len(lo) - len(pairs)
    both = np.concatenate([pairs, pairs[:, ::-1]]) if len(pairs) else pairs
    order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.zeros(0, np.int64)
    both = both[order]
    bounds = np.searchsorted(both[:, 0], np.arange(num_nodes + 1))
    lists = [both[bounds[i] : bounds[i + 1], 1].copy() for i in range(num_nodes)]
    return lists, self_loops, duplicates, len(pairs)


def load_edge_list(path):
    """Read a two-column edge list (whitespace- or comma-delimited)."""
    src, dst = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip().replace(",", " ")
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
            try:
                src.append(int(parts[0]))
                dst.append(int(parts[1]))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-integer edge endpoint") from exc
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


@dataclass
class ColumnSchema:
    """Maps node-table columns to roles.

    `feature_columns=None` means: every column except label and sensitive.
    """

    label: str
    sensitive: str
    feature_columns: list = None


# ---------------------------------------------------------------------------
# Binarization


@dataclass
class ColumnRule:
    kind: str  # "passthrough" | "threshold" | "quantile"
    theta: float = 0.0
    q: int = 4


@dataclass
class BinarizerSpec:
    """Per-column binarization rules plus fitted state.

    Quantile boundaries are fitted on train rows only and recorded so a
    transform is reproducible.
    """

    rules: list  # one ColumnRule per raw column
    boundaries: list = None  # per column: None or fitted quantile edges
    num_output_features: int = None

    @classmethod
    def auto(cls, raw, q=4):
        """Passthrough for 0/1 columns, quantile-bins(q) for numeric ones."""
        rules = []
        for j in range(raw.shape[1]):
            col = raw[:, j]
            if np.isin(col, (0, 1)).all():
                rules.append(ColumnRule("passthrough"))
            else:
                rules.append(ColumnRule("quantile", q=q))
        return cls(rules=rules)


def fit_binarizer(raw, spec, fit_mask=None):
    """Fit quantile boundaries on `fit_mask` rows (default: all rows)."""
    raw = np.asarray(raw, dtype=np.float64)
    if len(spec.rules) != raw.shape[1]:
        raise SchemaError(
            f"binarizer has {len(spec.rules)} rules for {raw.shape[1]} columns"
        )
    if fit_mask is None:
        fit_mask = np.ones(raw.shape[0], dtype=bool)
    boundaries = []
    n_out = 0
    for j, rule in enumerate(spec.rules):
        if rule.kind == "passthrough":
            boundaries.append(None)
            n_out += 1
        elif rule.kind == "threshold":
            boundaries.append(None)
            n_out += 1
        elif rule.kind == "quantile":
            col = raw[fit_mask, j]
            edges = np.quantile(col, np.linspace(0, 1, rule.q + 1)[1:-1])
            edges = np.unique(edges)
            if len(edges) == 0 or col.min() == col.max():
                warnings.warn(
                    f"column {j} is constant under quantile-bins; "
                    "collapsing to a single always-on bin"
                )
                edges = np.zeros(0)
            boundaries.append(edges)
            n_out += len(edges) + 1
        else:
            raise SchemaError(f"unknown binarization rule {rule.kind!r}")
    spec.boundaries = boundaries
    spec.num_output_features = n_out
    return spec


def binarize(raw, spec):
    """Apply a fitted BinarizerSpec; returns (N, M) uint8 bit vectors."""
    raw = np.asarray(raw, dtype=np.float64)
    if spec.boundaries is None:
        raise SchemaError("binarizer spec is not fitted")
    cols = []
    for j, rule in enumerate(spec.rules):
        col = raw[:, j]
        if rule.kind == "passthrough":
            if not np.isin(col, (0, 1)).all():
                raise SchemaError(f"column {j}: passthrough column is not 0/1")
            cols.append(col.astype(np.uint8)[:, None])
        elif rule.kind == "threshold":
            cols.append((col > rule.theta).astype(np.uint8)[:, None])
        else:
            edges = spec.boundaries[j]
            idx = np.searchsorted(edges, col, side="right")
            onehot = np.zeros((len(col), len(edges) + 1), dtype=np.uint8)
            onehot[np.arange(len(col)), idx] = 1
            cols.append(onehot)
    return np.concatenate(cols, axis=1)


# ---------------------------------------------------------------------------
# Loading


def load_dataset(edge_path, node_table_path, schema, binarizer=None, delimiter=None):
    """Build a validated GraphDataset from an edge list and a node table.

    The node table is delimited text with a header row.  Non-binary feature
    columns are binarized per `binarizer` (default: BinarizerSpec.auto).

    Returns (GraphDataset, IngestionReport).
    """
    table = pd.read_csv(node_table_path, sep=delimiter, engine="python")
    for col in (schema.label, schema.sensitive):
        if col not in table.columns:
            raise SchemaError(f"node table is missing column {col!r}")
    feat_cols = schema.feature_columns
    if feat_cols is None:
        feat_cols = [c for c in table.columns if c not in (schema.label, schema.sensitive)]
    missing = [c for c in feat_cols if c not in table.columns]
    if missing:
        raise SchemaError(f"node table is missing feature columns {missing}")

    raw = np.empty((len(table), len(feat_cols)), dtype=np.float64)
    for j, col in enumerate(feat_cols):
        try:
            raw[:, j] = pd.to_numeric(table[col], errors="raise").to_numpy(np.float64)
        except (ValueError, TypeError):
            bad = pd.to_numeric(table[col], errors="coerce")
            row = int(bad.index[bad.isna()][0])
            raise ParseError(
                f"non-numeric value in column {col!r}, row {row}: {table[col].iloc[row]!r}"
            ) from None

    labels = table[schema.label].to_numpy()
    sensitive = table[schema.sensitive].to_numpy()
    try:
        labels = labels.astype(np.int64)
        sensitive = sensitive.astype(np.int64)
    except ValueError as exc:
        raise ParseError(f"label/sensitive columns must be integer-coded: {exc}") from None

    n = len(table)
    src, dst = load_edge_list(edge_path)
    lists, self_loops, duplicates, n_edges = build_neighbor_lists(n, src, dst)

    if binarizer is None:
        binarizer = BinarizerSpec.auto(raw)
    if binarizer.boundaries is None:
        fit_binarizer(raw, binarizer)
    features = binarize(raw, binarizer)

    ds = GraphDataset(
        num_nodes=n,
        neighbor_lists=lists,
        features_binary=features,
        labels=labels,
        sensitive=sensitive,
        split=np.zeros(n, dtype=np.int8),
    )
    ds.validate()
    report = IngestionReport(
        num_nodes=n,
        num_edges=n_edges,
        dropped_self_loops=self_loops,
        dropped_duplicate_edges=duplicates,
    )
    report.tally_groups(labels, sensitive)
    return ds, report


def save_dataset(dataset, edge_path, node_table_path):
    """Write edge list + node table in the format load_dataset reads back."""
    lines = []
    for i, nbrs in enumerate(dataset.neighbor_lists):
        for j in nbrs[nbrs > i]:
            lines.append(f"{i} {j}\n")
    with open(edge_path, "w") as fh:
        fh.writelines(lines)
    cols = {"label": dataset.labels, "sensitive": dataset.sensitive}
    for j in range(dataset.num_features):
        cols[f"f{j}"] = dataset.features_binary[:, j]
    pd.DataFrame(cols).to_csv(node_table_path, index=False)


# ---------------------------------------------------------------------------
# Splitting


def split(dataset, train_fraction, seed):
    """Assign stratified train/test tags; returns the dataset (tags mutated).

    Stratification is by (label, sensitive group): every cell with >= 2
    members contributes at least one train and one test node.  Singleton
    cells go to train so class coverage is preserved.
    """
    if not (0.0 < train_fraction < 1.0):
        raise SplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = derive_rng(seed, STAGE_SPLIT)
    tags = np.full(dataset.num_nodes, TEST, dtype=np.int8)
    cells = np.unique(np.stack([dataset.labels, dataset.sensitive], axis=1), axis=0)
    for c, g in cells:
        idx = np.flatnonzero((dataset.labels == c) & (dataset.sensitive == g))
        if len(idx) == 1:
            tags[idx] = TRAIN
            continue
        n_train = int(np.clip(round(train_fraction * len(idx)), 1, len(idx) - 1))
        perm = rng.permutation(len(idx))
        tags[idx[perm[:n_train]]] = TRAIN
    for c in range(dataset.num_classes):
        if not np.any((dataset.labels == c) & (tags == TRAIN)):
            raise SplitError(f"class {c} has no training nodes after split")
    dataset.split = tags
    return dataset


# ---------------------------------------------------------------------------
# Synthetic biased graphs


@dataclass
class SyntheticSpec:
    """Two-block SBM with group-linked labels and informative binary features.

    The sensitive group is the block id.  The positive-label rate differs
    between groups by `bias`; labels are then flipped with prob `label_flip`.
    Half of the binary feature columns carry class signal, half carry group
    signal, so a trained classifier can pick up (and amplify) group bias.
    """

    nodes_per_block: int = 1000
    p_in: float = 0.01
    p_out: float = 0.002
    label_flip: float = 0.05
    bias: float = 0.4
    num_binary_features: int = 64
    feature_signal: float = 0.32
    group_signal: float = 0.85
    seed: int = 0

    def validate(self):
        if self.nodes_per_block < 1:
            raise SyntheticSpecError("nodes_per_block must be >= 1")
        for name in ("p_in", "p_out", "label_flip", "bias", "feature_signal", "group_signal"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise SyntheticSpecError(f"{name} must be in [0, 1], got {v}")
        if self.num_binary_features < 2:
            raise SyntheticSpecError("num_binary_features must be >= 2")


def generate_synthetic(spec):
    """Generate a seeded synthetic biased graph; bit-identical per spec."""
    spec.validate()
    rng = derive_rng(spec.seed, STAGE_SYNTH)
    nb = spec.nodes_per_block
    n = 2 * nb
    sensitive = np.repeat(np.arange(2, dtype=np.int64), nb)

    # Labels: positive rate 0.5 +/- bias/2 per group, then noise flips.
    pos_rate = np.where(sensitive == 0, 0.5 + spec.bias / 2, 0.5 - spec.bias / 2)
    labels = (rng.random(n) < pos_rate).astype(np.int64)
    flip = rng.random(n) < spec.label_flip
    labels[flip] = 1 - labels[flip]

    # Features: first half class-informative, second half group-correlated.
    m = spec.num_binary_features
    m_class = m // 2
    p_feat = np.empty((n, m))
    y = labels[:, None]
    s = sensitive[:, None]
    p_feat[:, :m_class] = 0.5 + spec.feature_signal * (2 * y - 1) / 2
    p_feat[:, m_class:] = 0.5 + spec.group_signal * (1 - 2 * s) / 2
    features = (rng.random((n, m)) < p_feat).astype(np.uint8)

    # Edges: homophilous two-block SBM over unordered pairs.
    iu, ju = np.triu_indices(n, k=1)
    same_block = sensitive[iu] == sensitive[ju]
    p_edge = np.where(same_block, spec.p_in, spec.p_out)
    present = rng.random(len(iu)) < p_edge
    lists, _, _, _ = build_neighbor_lists(n, iu[present], ju[present])

    ds = GraphDataset(
        num_nodes=n,
        neighbor_lists=lists,
        features_binary=features,
        labels=labels,
        sensitive=sensitive,
        split=np.zeros(n, dtype=np.int8),
    )
    ds.validate()
    return ds
