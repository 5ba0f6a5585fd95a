"""End-to-end evaluation, hyperparameter sweeps, and scaling benchmarks."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import data as data_mod
from . import training
from .encoding import encode_graph
from .errors import EmptyEvaluationError, FairHDError
from .metrics import PredictionSet, compute_report


def evaluate(model, encoded, dataset, split_tag="test", mode="full", positive_class=1,
             dp_form="auto"):
    """Predict over one split and assemble a FairnessReport."""
    if split_tag == "test":
        mask = dataset.test_mask()
    elif split_tag == "train":
        mask = dataset.train_mask()
    else:
        raise FairHDError(f"unknown split tag {split_tag!r}")
    if not np.any(mask):
        raise EmptyEvaluationError(f"split {split_tag!r} selects no nodes")
    if mode == "quantized":
        if model.quantized is None:
            raise FairHDError("model not finalized; quantized evaluation unavailable")
        class_hvs = model.quantized
    else:
        class_hvs = model.accumulators
    idx = np.flatnonzero(mask)
    preds = training.predict_batch(class_hvs, encoded.node_hvs[idx])
    pset = PredictionSet(
        predicted=preds,
        actual=dataset.labels[idx],
        sensitive=dataset.sensitive[idx],
    )
    return compute_report(pset, positive_class=positive_class, dp_form=dp_form, mode=mode)


@dataclass
class SweepSpec:
    alphas: list
    betas: list
    seeds: list
    train_fraction: float = 0.5

    def validate(self):
        if not (self.alphas and self.betas and self.seeds):
            raise FairHDError("sweep grid must be non-empty")
        if any(v < 0 for v in list(self.alphas) + list(self.betas)):
            raise FairHDError("alpha/beta grid values must be >= 0")


@dataclass
class RunResult:
    alpha: float
    beta: float
    seed: int
    report: object
    timings: dict = field(default_factory=dict)
    trace_summary: dict = field(default_factory=dict)

    def record(self):
        f = self.report
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "seed": self.seed,
            "acc": f.acc,
            "f1": f.f1,
            "dp_gap_pp": f.dp_gap_pp,
            "eo_gap_pp": f.eo_gap_pp,
            "prule": f.prule,
            "timings": self.timings,
            "trace_summary": self.trace_summary,
        }


def run_single(dataset, cfg, train_fraction=0.5, mode="full", dp_form="auto"):
    """Split, encode, train, and evaluate one configuration with timings.

    The run seed drives the split, the encoding, and the shuffle order, so
    a (dataset, cfg, fraction) triple fully determines the result.
    """
    timings = {}
    t0 = time.perf_counter()
    data_mod.split(dataset, train_fraction, cfg.seed)
    encoded = encode_graph(dataset, cfg.dim, cfg.seed)
    timings["encode"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    model, traces = training.train(encoded, dataset, cfg)
    timings["train"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report = evaluate(model, encoded, dataset, "test", mode=mode,
                      positive_class=cfg.positive_class, dp_form=dp_form)
    timings["infer"] = time.perf_counter() - t0

    summary = {
        "batches": len(traces),
        "mean_bias": float(np.mean([t.bias for t in traces])) if traces else 0.0,
        "mean_factor": float(np.mean([t.factor for t in traces])) if traces else 0.0,
    }
    return RunResult(
        alpha=cfg.alpha, beta=cfg.beta, seed=cfg.seed,
        report=report, timings=timings, trace_summary=summary,
    ), model, traces


def sweep(dataset, base_cfg, spec, results_path, mode="full", dp_form="auto"):
    """Cartesian (alpha, beta, seed) grid; one JSON record per line.

    Completed (alpha, beta, seed) keys already present in the results
    file are skipped, so an interrupted sweep resumes where it stopped.
    Individual run failures are recorded and do not stop the sweep.
    """
    spec.validate()
    done = set()
    try:
        with open(results_path) as fh:
            for line in fh:
                rec = json.loads(line)
                done.add((rec["alpha"], rec["beta"], rec["seed"]))
    except FileNotFoundError:
        pass

    results = []
    with open(results_path, "a") as fh:
        for alpha in spec.alphas:
            for beta in spec.betas:
                for seed in spec.seeds:
                    if (alpha, beta, seed) in done:
                        continue
                    cfg = training.TrainConfig(**{**base_cfg.__dict__,
                                                  "alpha": alpha, "beta": beta,
                                                  "seed": seed})
                    try:
                        result, _, _ = run_single(
                            dataset, cfg, spec.train_fraction, mode=mode, dp_form=dp_form
                        )
                        rec = result.record()
                        results.append(result)
                    except FairHDError as exc:
                        rec = {"alpha": alpha, "beta": beta, "seed": seed,
                               "error": str(exc)}
                    fh.write(json.dumps(rec) + "\n")
                    fh.flush()
    return results


def aggregate(results_path):
    """Mean +/- sample std (ddof=1) per (alpha, beta) from a results file."""
    groups = {}
    with open(results_path) as fh:
        for line in fh:
            rec = json.loads(line)
            if "error" in rec:
                continue
            groups.setdefault((rec["alpha"], rec["beta"]), []).append(rec)
    rows = []
    for (alpha, beta), recs in sorted(groups.items()):
        row = {"alpha": alpha, "beta": beta, "runs": len(recs)}
        for key in ("acc", "f1", "dp_gap_pp", "eo_gap_pp", "prule"):
            vals = [r[key] for r in recs if r.get(key) is not None]
            if vals:
                row[f"{key}_mean"] = float(np.mean(vals))
                row[f"{key}_std"] = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        rows.append(row)
    return rows


def export_table(results_path, out_path):
    """Flat delimited table (alpha, beta, seed, metrics) for external plotting."""
    cols = ["alpha", "beta", "seed", "acc", "f1", "dp_gap_pp", "eo_gap_pp", "prule"]
    with open(results_path) as fh, open(out_path, "w") as out:
        out.write(",".join(cols) + "\n")
        for line in fh:
            rec = json.loads(line)
            if "error" in rec:
                continue
            out.write(",".join(
                "NA" if rec.get(c) is None else str(rec[c]) for c in cols) + "\n")


def timing_benchmark(sizes, cfg, synth_spec=None, train_fraction=0.5):
    """Phase timings per synthetic-graph size plus a linear-fit residual check.

    Fits train time = slope * N through the origin and reports each
    point's relative residual; near-linear scaling in node count is the
    expected behavior.
    """
    if synth_spec is None:
        synth_spec = data_mod.SyntheticSpec(seed=cfg.seed)
    rows = []
    for n in sizes:
        spec = data_mod.SyntheticSpec(**{**synth_spec.__dict__,
                                         "nodes_per_block": n // 2})
        dataset = data_mod.generate_synthetic(spec)
        result, _, _ = run_single(dataset, cfg, train_fraction)
        rows.append({"nodes": n, **result.timings})
    ns = np.array([r["nodes"] for r in rows], dtype=np.float64)
    ts = np.array([r["train"] for r in rows], dtype=np.float64)
    slope = float(np.sum(ts * ns) / np.sum(ns * ns))
    for r, t, n in zip(rows, ts, ns):
        r["train_fit"] = slope * n
        r["train_residual_rel"] = abs(t - slope * n) / (slope * n) if slope > 0 else 0.0
    return rows
