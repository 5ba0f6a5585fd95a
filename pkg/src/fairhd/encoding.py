"""Per-node hypervector encoding of graph structure.

Every node gets four accumulators: a feature hypervector built from
position hypervectors of its active features, 1-hop and 2-hop neighbor
sums, and a final node hypervector that binds the three with role
hypervectors.  All arithmetic is exact int64, so encodings are
bit-identical across runs given the same seed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .core import (
    STAGE_BASE_HV,
    STAGE_ROLE_HVS,
    PositionTable,
    derive_rng,
    random_hypervectors,
)
from .errors import GraphIntegrityError, InvalidDimensionError, SchemaError

_CACHE_MAGIC = b"FHDENC1\0"
_CACHE_VERSION = 1


@dataclass
class EncodedGraph:
    """Fixed per-node hypervectors precomputed before training."""

    feature_hvs: np.ndarray  # (N, D) int64
    one_hop: np.ndarray  # (N, D) int64
    two_hop: np.ndarray  # (N, D) int64
    node_hvs: np.ndarray  # (N, D) int64
    roles: np.ndarray  # (3, D) int8: role HVs for self / 1-hop / 2-hop
    positions: PositionTable
    seed: int

    @property
    def dim(self):
        return self.node_hvs.shape[1]

    @property
    def num_nodes(self):
        return self.node_hvs.shape[0]


def encode_features(dataset, positions):
    """Feature hypervectors: sum of position rows at active feature indices."""
    feats = dataset.features_binary
    if feats.shape[1] != positions.num_features:
        raise SchemaError(
            f"feature length {feats.shape[1]} != position table size {positions.num_features}"
        )
    return feats.astype(np.int64) @ positions.rows.astype(np.int64)


def encode_one_hop(dataset, feature_hvs):
    """1-hop accumulators: sum of neighbors' feature hypervectors.

    The node's own feature hypervector is not included.
    """
    adj = dataset.adjacency()
    if adj.shape[0] != feature_hvs.shape[0]:
        raise GraphIntegrityError("adjacency size does not match encoded node count")
    return np.asarray(adj @ feature_hvs, dtype=np.int64)


def encode_two_hop(dataset, one_hop):
    """2-hop accumulators: sum of neighbors' 1-hop accumulators.

    Backtracking paths are included by construction (a node's own feature
    hypervector re-enters through each neighbor).
    """
    adj = dataset.adjacency()
    return np.asarray(adj @ one_hop, dtype=np.int64)


def encode_nodes(feature_hvs, one_hop, two_hop, role0, role1, role2):
    """Final node hypervectors: role-bound sum of the three accumulators."""
    for arr in (one_hop, two_hop):
        if arr.shape != feature_hvs.shape:
            raise InvalidDimensionError("encoded accumulator shapes differ")
    d = feature_hvs.shape[1]
    for r in (role0, role1, role2):
        if np.asarray(r).shape[-1] != d:
            raise InvalidDimensionError("role hypervector dim does not match encodings")
    return (
        feature_hvs * role0.astype(np.int64)
        + one_hop * role1.astype(np.int64)
        + two_hop * role2.astype(np.int64)
    )


def encode_graph(dataset, dim, seed):
    """Run the full encoding pipeline for a dataset.

    The position-table base and the three role hypervectors are sampled
    independently from sub-streams of `seed`.
    """
    positions = PositionTable.generate(
        dataset.num_features, dim, derive_rng(seed, STAGE_BASE_HV)
    )
    roles = random_hypervectors(3, dim, derive_rng(seed, STAGE_ROLE_HVS))
    n = encode_features(dataset, positions)
    h1 = encode_one_hop(dataset, n)
    h2 = encode_two_hop(dataset, h1)
    e = encode_nodes(n, h1, h2, roles[0], roles[1], roles[2])
    return EncodedGraph(
        feature_hvs=n,
        one_hop=h1,
        two_hop=h2,
        node_hvs=e,
        roles=roles,
        positions=positions,
        seed=seed,
    )


def save_encoded(path, encoded):
    """Write an EncodedGraph cache: header + raw little-endian lane data."""
    n, d = encoded.node_hvs.shape
    m = encoded.positions.num_features
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<IIIIq", _CACHE_VERSION, d, n, m, encoded.seed))
        fh.write(encoded.positions.base.astype("<i1").tobytes())
        fh.write(encoded.roles.astype("<i1").tobytes())
        for arr in (encoded.feature_hvs, encoded.one_hop, encoded.two_hop, encoded.node_hvs):
            fh.write(arr.astype("<i8").tobytes())


def load_encoded(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise SchemaError(f"{path}: not an encoded-graph cache file")
        version, d, n, m, seed = struct.unpack("<IIIIq", fh.read(24))
        if version != _CACHE_VERSION:
            raise SchemaError(f"{path}: unsupported cache version {version}")
        base = np.frombuffer(fh.read(d), dtype="<i1").astype(np.int8)
        roles = (
            np.frombuffer(fh.read(3 * d), dtype="<i1").astype(np.int8).reshape(3, d)
        )
        arrays = []
        for _ in range(4):
            arrays.append(
                np.frombuffer(fh.read(8 * n * d), dtype="<i8")
                .astype(np.int64)
                .reshape(n, d)
            )
    rows = np.stack([np.roll(base, i) for i in range(m)])
    positions = PositionTable(base=base, rows=rows)
    return EncodedGraph(
        feature_hvs=arrays[0],
        one_hop=arrays[1],
        two_hop=arrays[2],
        node_hvs=arrays[3],
        roles=roles,
        positions=positions,
        seed=seed,
    )
