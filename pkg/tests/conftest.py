"""Shared test fixtures and graph-building helpers."""

import numpy as np
import pytest

from fairhd.data import TEST, TRAIN, GraphDataset, build_neighbor_lists


def make_dataset(num_nodes, edges, features, labels, sensitive, split=None):
    """Assemble a validated GraphDataset from plain Python inputs."""
    src = np.array([e[0] for e in edges], dtype=np.int64)
    dst = np.array([e[1] for e in edges], dtype=np.int64)
    lists, _, _, _ = build_neighbor_lists(num_nodes, src, dst)
    if split is None:
        split = np.zeros(num_nodes, dtype=np.int8)
    ds = GraphDataset(
        num_nodes=num_nodes,
        neighbor_lists=lists,
        features_binary=np.asarray(features, dtype=np.uint8),
        labels=np.asarray(labels, dtype=np.int64),
        sensitive=np.asarray(sensitive, dtype=np.int64),
        split=np.asarray(split, dtype=np.int8),
    )
    ds.validate()
    return ds


@pytest.fixture
def toy_dataset():
    """6-node, 2-class, 2-group graph with every node in train."""
    rng = np.random.default_rng(42)
    features = rng.integers(0, 2, size=(6, 8))
    return make_dataset(
        num_nodes=6,
        edges=[(0, 1), (1, 2), (3, 4), (4, 5), (2, 3)],
        features=features,
        labels=[0, 0, 0, 1, 1, 1],
        sensitive=[0, 1, 0, 1, 0, 1],
        split=[TRAIN] * 6,
    )


@pytest.fixture
def split_dataset():
    """12-node graph with a train/test split and both classes in each part."""
    rng = np.random.default_rng(7)
    features = rng.integers(0, 2, size=(12, 10))
    split = [TRAIN, TRAIN, TRAIN, TEST, TEST, TEST] * 2
    return make_dataset(
        num_nodes=12,
        edges=[(i, (i + 1) % 12) for i in range(12)],
        features=features,
        labels=[0, 1] * 6,
        sensitive=[0, 0, 0, 1, 1, 1] * 2,
        split=split,
    )
