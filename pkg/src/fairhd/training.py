"""Class-hypervector training with a fairness-driven shrinkage factor.

Class hypervectors are initialized by bundling the node hypervectors of
each class's training nodes, then refined over shuffled mini-batches.
Each batch is predicted against the batch-start model, a scalar fairness
factor is derived from the batch's demographic parity gap, and updates
are applied with the ground-truth contribution shrunk by that factor.
With alpha = beta = 0 the procedure is exactly vanilla graph HDC.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .core import (
    STAGE_SHUFFLE,
    derive_rng,
    pack_bipolar,
    sign_quantize,
    unpack_bipolar,
)
from .errors import (
    DegenerateSimilarityError,
    FairHDError,
    MissingClassError,
    SchemaError,
)
from .metrics import PredictionSet, dp_gap_binary, dp_gap_multi
from .errors import UndefinedMetricError

_MODEL_MAGIC = b"FHDMOD1\0"
_MODEL_VERSION = 1
_F_CLAMP_EPS = 1e-6


@dataclass
class TrainConfig:
    dim: int = 4096
    eta: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    epochs: int = 20
    batch_size: int = 256
    seed: int = 0
    fairness_gap_form: str = "multi"  # "multi" or "binary"
    clamp_factor: bool = True
    positive_class: int = 1

    def validate(self):
        if self.dim < 1:
            raise FairHDError("dim must be >= 1")
        if self.eta <= 0:
            raise FairHDError("eta must be > 0")
        if self.alpha < 0 or self.beta < 0:
            raise FairHDError("alpha and beta must be >= 0")
        if self.batch_size < 1:
            raise FairHDError("batch_size must be >= 1")
        if self.epochs < 0:
            raise FairHDError("epochs must be >= 0")
        if self.fairness_gap_form not in ("multi", "binary"):
            raise FairHDError(f"unknown fairness_gap_form {self.fairness_gap_form!r}")


@dataclass
class ClassModel:
    """Per-class accumulators plus (after finalize) their sign-quantized forms."""

    accumulators: np.ndarray  # (C, D) float64, full precision during training
    quantized: np.ndarray = None  # (C, D) int8 after finalize

    @property
    def num_classes(self):
        return self.accumulators.shape[0]

    @property
    def dim(self):
        return self.accumulators.shape[1]


@dataclass
class BatchTrace:
    epoch: int
    batch: int
    bias: float
    factor: float
    correct: int
    incorrect: int


def init_class_hvs(encoded, dataset):
    """Bundle training-node hypervectors per class (exact integer sums)."""
    train = dataset.train_mask()
    c = dataset.num_classes
    acc = np.zeros((c, encoded.dim), dtype=np.float64)
    for i in range(c):
        members = train & (dataset.labels == i)
        if not np.any(members):
            raise MissingClassError(f"class {i} has no training nodes")
        acc[i] = encoded.node_hvs[members].sum(axis=0)
    return ClassModel(accumulators=acc)


def _similarities(class_hvs, node_hvs):
    """Cosine similarities between rows of node_hvs and each class HV."""
    ch = np.asarray(class_hvs, dtype=np.float64)
    nh = np.asarray(node_hvs, dtype=np.float64)
    cn = np.linalg.norm(ch, axis=1)
    nn = np.linalg.norm(nh, axis=1)
    if np.any(cn == 0):
        raise DegenerateSimilarityError("a class hypervector is all-zero")
    if np.any(nn == 0):
        raise DegenerateSimilarityError("a node hypervector is all-zero")
    return (nh / nn[:, None]) @ (ch / cn[:, None]).T


def predict_batch(class_hvs, node_hvs):
    """Argmax-similarity class per node; ties break to the lowest class id."""
    return np.argmax(_similarities(class_hvs, node_hvs), axis=1).astype(np.int64)


def predict(model, node_hv, mode="full"):
    hvs = model.quantized if mode == "quantized" else model.accumulators
    if hvs is None:
        raise FairHDError("model not finalized; quantized prediction unavailable")
    return int(predict_batch(hvs, np.asarray(node_hv)[None, :])[0])


def batch_fairness_factor(predicted, sensitive, cfg, num_classes):
    """Compute (bias, factor) for one batch from its current predictions.

    The bias term is the batch demographic parity gap in the configured
    form; batches where the gap is undefined (e.g. one group present
    under the binary form) contribute no debiasing signal (bias 0).
    The factor alpha*bias + beta is clamped into [0, 1) when enabled.
    """
    preds = PredictionSet(predicted, predicted, sensitive)
    try:
        if cfg.fairness_gap_form == "binary":
            bias = dp_gap_binary(preds, cfg.positive_class)
        else:
            bias = dp_gap_multi(preds, num_classes=num_classes)
    except UndefinedMetricError:
        bias = 0.0
    factor = cfg.alpha * bias + cfg.beta
    if cfg.clamp_factor:
        factor = min(max(factor, 0.0), 1.0 - _F_CLAMP_EPS)
    elif not (0.0 <= factor < 1.0):
        raise FairHDError(
            f"fairness factor {factor} outside [0, 1); enable clamping or retune alpha/beta"
        )
    return bias, factor


def apply_updates(model, labels, predicted, node_hvs, factor, eta):
    """Apply one batch of class-HV updates (predictions already fixed).

    Every node adds eta*(1-factor) times its hypervector to its true
    class; misclassified nodes additionally subtract the full eta times
    their hypervector from the wrongly predicted class.
    """
    if not (0.0 <= factor < 1.0):
        raise FairHDError(f"factor must be in [0, 1), got {factor}")
    gain = eta * (1.0 - factor)
    wrong = predicted != labels
    for c in range(model.num_classes):
        mine = labels == c
        if np.any(mine):
            model.accumulators[c] += gain * node_hvs[mine].sum(axis=0)
        hit = wrong & (predicted == c)
        if np.any(hit):
            model.accumulators[c] -= eta * node_hvs[hit].sum(axis=0)
    return model


def train(encoded, dataset, cfg):
    """Full fairness-aware training loop.

    Returns (finalized ClassModel, list of BatchTrace).  Deterministic:
    identical (encoded, dataset, cfg) always yields identical models.
    """
    cfg.validate()
    if encoded.dim != cfg.dim:
        raise SchemaError(f"encoded dim {encoded.dim} != config dim {cfg.dim}")
    model = init_class_hvs(encoded, dataset)
    train_idx = np.flatnonzero(dataset.train_mask())
    labels = dataset.labels
    sensitive = dataset.sensitive
    traces = []
    for epoch in range(cfg.epochs):
        rng = derive_rng(cfg.seed, STAGE_SHUFFLE, epoch)
        order = train_idx[rng.permutation(len(train_idx))]
        for b, start in enumerate(range(0, len(order), cfg.batch_size)):
            batch = order[start : start + cfg.batch_size]
            hvs = encoded.node_hvs[batch]
            preds = predict_batch(model.accumulators, hvs)
            bias, factor = batch_fairness_factor(
                preds, sensitive[batch], cfg, dataset.num_classes
            )
            apply_updates(model, labels[batch], preds, hvs, factor, cfg.eta)
            correct = int(np.sum(preds == labels[batch]))
            traces.append(
                BatchTrace(
                    epoch=epoch,
                    batch=b,
                    bias=bias,
                    factor=factor,
                    correct=correct,
                    incorrect=len(batch) - correct,
                )
            )
    finalize(model)
    return model, traces


def train_vanilla(encoded, dataset, cfg):
    """Plain graph-HDC baseline: same schedule, no fairness shrinkage.

    Correct nodes reinforce their class HV by eta*E; misclassified nodes
    additionally subtract eta*E from the wrongly predicted class.  With
    alpha = beta = 0 the fairness-aware loop must match this bit for bit.
    """
    cfg.validate()
    if encoded.dim != cfg.dim:
        raise SchemaError(f"encoded dim {encoded.dim} != config dim {cfg.dim}")
    model = init_class_hvs(encoded, dataset)
    train_idx = np.flatnonzero(dataset.train_mask())
    labels = dataset.labels
    for epoch in range(cfg.epochs):
        rng = derive_rng(cfg.seed, STAGE_SHUFFLE, epoch)
        order = train_idx[rng.permutation(len(train_idx))]
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            hvs = encoded.node_hvs[batch]
            preds = predict_batch(model.accumulators, hvs)
            wrong = preds != labels[batch]
            for c in range(model.num_classes):
                mine = labels[batch] == c
                if np.any(mine):
                    model.accumulators[c] += cfg.eta * hvs[mine].sum(axis=0)
                hit = wrong & (preds == c)
                if np.any(hit):
                    model.accumulators[c] -= cfg.eta * hvs[hit].sum(axis=0)
    finalize(model)
    return model


def finalize(model):
    """Populate the sign-quantized class hypervectors."""
    model.quantized = np.stack([sign_quantize(a) for a in model.accumulators])
    return model


# ---------------------------------------------------------------------------
# Serialization


def save_model(path, model, mode="full"):
    """Binary model file: header + float64 accumulators + packed quantized HVs."""
    if model.quantized is None:
        finalize(model)
    c, d = model.accumulators.shape
    mode_code = 1 if mode == "quantized" else 0
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(struct.pack("<IIIB", _MODEL_VERSION, d, c, mode_code))
        fh.write(model.accumulators.astype("<f8").tobytes())
        for q in model.quantized:
            fh.write(pack_bipolar(q).tobytes())


def load_model(path):
    """Returns (ClassModel, mode)."""
    with open(path, "rb") as fh:
        if fh.read(8) != _MODEL_MAGIC:
            raise SchemaError(f"{path}: not a model file")
        version, d, c, mode_code = struct.unpack("<IIIB", fh.read(13))
        if version != _MODEL_VERSION:
            raise SchemaError(f"{path}: unsupported model version {version}")
        acc = (
            np.frombuffer(fh.read(8 * c * d), dtype="<f8")
            .astype(np.float64)
            .reshape(c, d)
        )
        nbytes = (d + 7) // 8
        quantized = np.stack(
            [
                unpack_bipolar(np.frombuffer(fh.read(nbytes), dtype=np.uint8), d)
                for _ in range(c)
            ]
        )
    model = ClassModel(accumulators=acc, quantized=quantized)
    return model, ("quantized" if mode_code else "full")


def save_traces(path, traces):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "batch", "bias", "factor", "correct", "incorrect"])
        for t in traces:
            writer.writerow([t.epoch, t.batch, repr(t.bias), repr(t.factor), t.correct, t.incorrect])


def load_traces(path):
    traces = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            traces.append(
                BatchTrace(
                    epoch=int(row["epoch"]),
                    batch=int(row["batch"]),
                    bias=float(row["bias"]),
                    factor=float(row["factor"]),
                    correct=int(row["correct"]),
                    incorrect=int(row["incorrect"]),
                )
            )
    return traces
