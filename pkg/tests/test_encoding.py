"""Graph encoding: feature, 1-hop, 2-hop, and node hypervectors."""

import numpy as np
import pytest

from conftest import make_dataset
from fairhd.core import PositionTable, derive_rng, random_hypervectors
from fairhd.encoding import (
    encode_features,
    encode_graph,
    encode_nodes,
    encode_one_hop,
    encode_two_hop,
    load_encoded,
    save_encoded,
)
from fairhd.errors import InvalidDimensionError, SchemaError


def oracle_encode(dataset, positions, roles):
    """Naive double-loop reference implementation of the full encoding."""
    n, m = dataset.features_binary.shape
    d = positions.dim
    N = np.zeros((n, d), dtype=np.int64)
    for k in range(n):
        for i in range(m):
            if dataset.features_binary[k, i]:
                N[k] += positions.rows[i]
    H1 = np.zeros_like(N)
    for k in range(n):
        for j in dataset.neighbor_lists[k]:
            H1[k] += N[j]
    H2 = np.zeros_like(N)
    for k in range(n):
        for j in dataset.neighbor_lists[k]:
            H2[k] += H1[j]
    E = np.zeros_like(N)
    for k in range(n):
        for lane in range(d):
            E[k, lane] = (
                N[k, lane] * roles[0][lane]
                + H1[k, lane] * roles[1][lane]
                + H2[k, lane] * roles[2][lane]
            )
    return N, H1, H2, E


def random_small_dataset(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 6))
    features = rng.integers(0, 2, size=(n, m))
    possible = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = [e for e in possible if rng.random() < 0.5]
    labels = rng.integers(0, 2, size=n)
    sensitive = rng.integers(0, 2, size=n)
    return make_dataset(n, edges, features, labels, sensitive)


def test_encoding_matches_double_loop_oracle_on_random_small_graphs():
    rng = np.random.default_rng(2024)
    for trial in range(100):
        ds = random_small_dataset(rng)
        seed = trial
        encoded = encode_graph(ds, 16, seed)
        N, H1, H2, E = oracle_encode(ds, encoded.positions, encoded.roles)
        assert np.array_equal(encoded.feature_hvs, N)
        assert np.array_equal(encoded.one_hop, H1)
        assert np.array_equal(encoded.two_hop, H2)
        assert np.array_equal(encoded.node_hvs, E)


def test_feature_encoding_hand_cases():
    positions = PositionTable.generate(3, 8, derive_rng(0, 0))
    ds = make_dataset(3, [], [[1, 0, 1], [0, 0, 0], [0, 1, 0]], [0, 0, 1], [0, 1, 0])
    N = encode_features(ds, positions)
    assert np.array_equal(N[0], positions.rows[0].astype(np.int64) + positions.rows[2])
    assert np.array_equal(N[1], np.zeros(8))
    assert np.array_equal(N[2], positions.rows[1])


def test_feature_length_mismatch_rejected():
    positions = PositionTable.generate(4, 8, derive_rng(0, 0))
    ds = make_dataset(2, [], [[1, 0], [0, 1]], [0, 1], [0, 1])
    with pytest.raises(SchemaError):
        encode_features(ds, positions)


def test_one_and_two_hop_on_path_graph():
    # Path a-b-c: H1_b = N_a + N_c; H2_a = H1_b (includes the backtrack term).
    rng = np.random.default_rng(0)
    ds = make_dataset(3, [(0, 1), (1, 2)], rng.integers(0, 2, (3, 4)), [0, 1, 0], [0, 1, 0])
    positions = PositionTable.generate(4, 16, derive_rng(0, 0))
    N = encode_features(ds, positions)
    H1 = encode_one_hop(ds, N)
    H2 = encode_two_hop(ds, H1)
    assert np.array_equal(H1[1], N[0] + N[2])
    assert np.array_equal(H1[0], N[1])
    assert np.array_equal(H2[0], H1[1])
    assert np.array_equal(H2[0], N[0] + N[2])


def test_isolated_node_hops_are_zero():
    rng = np.random.default_rng(1)
    ds = make_dataset(3, [(0, 1)], rng.integers(0, 2, (3, 4)), [0, 1, 0], [0, 1, 0])
    encoded = encode_graph(ds, 16, 0)
    assert np.array_equal(encoded.one_hop[2], np.zeros(16))
    assert np.array_equal(encoded.two_hop[2], np.zeros(16))
    # Isolated node: E reduces to the role-bound feature hypervector.
    expected = encoded.feature_hvs[2] * encoded.roles[0].astype(np.int64)
    assert np.array_equal(encoded.node_hvs[2], expected)


def test_star_graph_two_hop_center():
    # Star center 0 with 3 leaves: every leaf's H1 is N_center,
    # so H2_center = 3 * N_center.
    rng = np.random.default_rng(2)
    ds = make_dataset(4, [(0, 1), (0, 2), (0, 3)], rng.integers(0, 2, (4, 4)),
                      [0, 1, 0, 1], [0, 1, 0, 1])
    encoded = encode_graph(ds, 16, 0)
    assert np.array_equal(encoded.two_hop[0], 3 * encoded.feature_hvs[0])


def test_identity_roles_make_node_hv_plain_sum():
    rng = np.random.default_rng(3)
    ds = make_dataset(3, [(0, 1), (1, 2)], rng.integers(0, 2, (3, 4)), [0, 1, 0], [0, 1, 0])
    positions = PositionTable.generate(4, 16, derive_rng(0, 0))
    N = encode_features(ds, positions)
    H1 = encode_one_hop(ds, N)
    H2 = encode_two_hop(ds, H1)
    ones = np.ones(16, dtype=np.int8)
    E = encode_nodes(N, H1, H2, ones, ones, ones)
    assert np.array_equal(E, N + H1 + H2)


def test_encode_nodes_dim_mismatch_rejected():
    N = np.zeros((2, 8), dtype=np.int64)
    with pytest.raises(InvalidDimensionError):
        encode_nodes(N, N, N, np.ones(4, np.int8), np.ones(8, np.int8), np.ones(8, np.int8))


def test_permutation_equivariance():
    rng = np.random.default_rng(4)
    features = rng.integers(0, 2, (5, 6))
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]
    ds = make_dataset(5, edges, features, [0, 1, 0, 1, 0], [0, 0, 1, 1, 0])
    perm = np.array([3, 0, 4, 1, 2])
    inv = np.argsort(perm)
    ds2 = make_dataset(
        5,
        [(inv[a], inv[b]) for a, b in edges],
        features[perm],
        ds.labels[perm],
        ds.sensitive[perm],
    )
    e1 = encode_graph(ds, 16, 7)
    e2 = encode_graph(ds2, 16, 7)
    assert np.array_equal(e2.node_hvs, e1.node_hvs[perm])


def test_encoding_is_deterministic():
    rng = np.random.default_rng(5)
    ds = make_dataset(4, [(0, 1), (2, 3)], rng.integers(0, 2, (4, 4)),
                      [0, 1, 0, 1], [0, 1, 0, 1])
    a = encode_graph(ds, 32, 9)
    b = encode_graph(ds, 32, 9)
    assert np.array_equal(a.node_hvs, b.node_hvs)
    assert np.array_equal(a.roles, b.roles)


def test_linearity_in_disjoint_feature_sets():
    # Splitting a feature vector into disjoint halves splits the encoding.
    positions = PositionTable.generate(4, 16, derive_rng(0, 0))
    full = make_dataset(1, [], [[1, 1, 1, 0]], [0], [0])
    left = make_dataset(1, [], [[1, 0, 1, 0]], [0], [0])
    right = make_dataset(1, [], [[0, 1, 0, 0]], [0], [0])
    assert np.array_equal(
        encode_features(full, positions),
        encode_features(left, positions) + encode_features(right, positions),
    )


def test_cache_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    ds = make_dataset(4, [(0, 1), (1, 2), (2, 3)], rng.integers(0, 2, (4, 5)),
                      [0, 1, 0, 1], [0, 1, 0, 1])
    encoded = encode_graph(ds, 32, 11)
    path = tmp_path / "enc.bin"
    save_encoded(path, encoded)
    loaded = load_encoded(path)
    assert loaded.seed == 11
    assert np.array_equal(loaded.feature_hvs, encoded.feature_hvs)
    assert np.array_equal(loaded.one_hop, encoded.one_hop)
    assert np.array_equal(loaded.two_hop, encoded.two_hop)
    assert np.array_equal(loaded.node_hvs, encoded.node_hvs)
    assert np.array_equal(loaded.roles, encoded.roles)
    assert np.array_equal(loaded.positions.rows, encoded.positions.rows)


def test_cache_rejects_foreign_file(tmp_path):
    path = tmp_path / "bogus.bin"
    path.write_bytes(b"not a cache file")
    with pytest.raises(SchemaError):
        load_encoded(path)
