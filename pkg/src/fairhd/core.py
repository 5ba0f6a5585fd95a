"""Bipolar hypervector algebra.

Hypervectors are 1-D numpy arrays with values in {+1, -1} (dtype int8).
Accumulators are 1-D numpy arrays of signed integers (int64) or floats
holding bundling sums.  All operations are pure functions; randomness
enters only through explicitly passed generators or seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSimilarityError, InvalidDimensionError

# Sub-stream tags for deriving stage generators from one master seed.
# derive_rng(seed, TAG, ...) gives each pipeline stage an independent,
# reproducible stream.
STAGE_BASE_HV = 0
STAGE_ROLE_HVS = 1
STAGE_SPLIT = 2
STAGE_SYNTH = 3
STAGE_SHUFFLE = 4


def derive_rng(seed, *key):
    """Return a Generator for sub-stream `key` of master `seed`.

    Identical (seed, key) pairs always yield identical streams.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def random_hypervector(dim, rng):
    """Draw a random bipolar hypervector of length `dim`.

    Each lane is independently +1 or -1 with probability 1/2.

    Args:
        dim: hypervector dimensionality, >= 1.
        rng: numpy Generator or integer seed.

    Returns:
        np.ndarray of shape (dim,), dtype int8, values in {+1, -1}.
    """
    if dim < 1:
        raise InvalidDimensionError(f"hypervector dimension must be >= 1, got {dim}")
    rng = _as_rng(rng)
    return (rng.integers(0, 2, size=dim, dtype=np.int8) * 2 - 1).astype(np.int8)


def random_hypervectors(count, dim, rng):
    """Draw `count` independent random bipolar hypervectors as a (count, dim) matrix."""
    if dim < 1:
        raise InvalidDimensionError(f"hypervector dimension must be >= 1, got {dim}")
    rng = _as_rng(rng)
    return (rng.integers(0, 2, size=(count, dim), dtype=np.int8) * 2 - 1).astype(np.int8)


def cyclic_shift(hv, k):
    """Rotate lanes toward higher index: output lane (j+k) mod D = input lane j."""
    hv = np.asarray(hv)
    return np.roll(hv, k % hv.shape[-1], axis=-1)


def bundle(hvs, dim=None):
    """Lane-wise integer sum of hypervectors/accumulators.

    An empty input yields the all-zero accumulator (requires `dim`).
    """
    if len(hvs) == 0:
        if dim is None:
            raise InvalidDimensionError("bundle of empty sequence needs an explicit dim")
        return np.zeros(dim, dtype=np.int64)
    dims = {np.asarray(h).shape[-1] for h in hvs}
    if len(dims) != 1:
        raise InvalidDimensionError(f"bundle inputs disagree on dimension: {sorted(dims)}")
    arr = np.asarray(hvs)
    if dim is not None and arr.shape[-1] != dim:
        raise InvalidDimensionError(f"bundle inputs have dim {arr.shape[-1]}, expected {dim}")
    return arr.astype(np.int64).sum(axis=0)


def bind(a, b):
    """Lane-wise product (binding). Self-inverse when b is bipolar."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[-1]:
        raise InvalidDimensionError(f"bind dims differ: {a.shape[-1]} vs {b.shape[-1]}")
    return a * b


def cosine_similarity(a, b):
    """Cosine similarity <a,b> / (|a| |b|).

    Raises DegenerateSimilarityError on an all-zero input; a silent 0
    would mask encoding bugs upstream.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[-1] != b.shape[-1]:
        raise InvalidDimensionError(f"cosine dims differ: {a.shape[-1]} vs {b.shape[-1]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateSimilarityError("cosine similarity undefined for all-zero vector")
    return float(np.dot(a, b) / (na * nb))


def sign_quantize(a):
    """Quantize an accumulator to bipolar form: lane >= 0 -> +1, lane < 0 -> -1.

    The zero tie maps to +1 so quantization stays deterministic.
    """
    a = np.asarray(a)
    return np.where(a >= 0, 1, -1).astype(np.int8)


def pack_bipolar(hv):
    """Bit-pack a bipolar hypervector (+1 -> 1, -1 -> 0), 8 lanes per byte."""
    hv = np.asarray(hv)
    return np.packbits((hv > 0).astype(np.uint8))


def unpack_bipolar(packed, dim):
    """Inverse of pack_bipolar."""
    bits = np.unpackbits(np.asarray(packed, dtype=np.uint8), count=dim)
    return (bits.astype(np.int8) * 2 - 1).astype(np.int8)


@dataclass(frozen=True)
class PositionTable:
    """Position hypervectors for feature indices.

    Row i is the base hypervector rotated i lanes toward higher index,
    so row 0 equals the base and consecutive rows differ by one rotation.
    """

    base: np.ndarray
    rows: np.ndarray  # (num_features, dim), int8

    @property
    def num_features(self):
        return self.rows.shape[0]

    @property
    def dim(self):
        return self.rows.shape[1]

    @classmethod
    def generate(cls, num_features, dim, rng):
        base = random_hypervector(dim, rng)
        rows = np.stack([cyclic_shift(base, i) for i in range(num_features)])
        return cls(base=base, rows=rows)
