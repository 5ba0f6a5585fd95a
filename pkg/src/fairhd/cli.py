"""Command-line interface.

Subcommands: synth, encode, train, eval, sweep, bench.  Every command
writes a manifest.json capturing the merged effective configuration so a
run can be reproduced byte-for-byte.  Exit codes: 0 success, 1 runtime
error, 2 usage error, 3 data/schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import data as data_mod
from . import evaluation, training
from .encoding import encode_graph, save_encoded
from .errors import (
    FairHDError,
    GraphIntegrityError,
    MissingClassError,
    ParseError,
    SchemaError,
    SplitError,
    SyntheticSpecError,
)

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_DATA = 3

_DATA_ERRORS = (
    SchemaError,
    ParseError,
    GraphIntegrityError,
    SplitError,
    MissingClassError,
    SyntheticSpecError,
)


def _usage_error(msg):
    print(f"error: {msg}", file=sys.stderr)
    raise SystemExit(EXIT_USAGE)


def _parse_schema(text):
    """Parse 'label=COL,sensitive=COL[,features=a|b|c]' into a ColumnSchema."""
    fields = {}
    for part in text.split(","):
        if "=" not in part:
            _usage_error(f"bad schema fragment {part!r}; expected key=value")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    if "label" not in fields or "sensitive" not in fields:
        _usage_error("schema must name label=COL and sensitive=COL")
    features = fields.get("features")
    return data_mod.ColumnSchema(
        label=fields["label"],
        sensitive=fields["sensitive"],
        feature_columns=features.split("|") if features else None,
    )


def _write_manifest(out_dir, command, effective):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"command": command, "config": effective}
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _merge_config(args, defaults):
    """flags > config file > defaults; returns the effective dict."""
    effective = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            _usage_error(f"unknown config keys: {sorted(unknown)}")
        effective.update(file_cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            effective[key] = value
    return effective


def _load_dataset_from(effective):
    if not effective["dataset_edges"] or not effective["dataset_nodes"]:
        _usage_error("--dataset-edges and --dataset-nodes are required")
    schema = _parse_schema(effective["schema"])
    dataset, report = data_mod.load_dataset(
        effective["dataset_edges"], effective["dataset_nodes"], schema
    )
    return dataset, report


def _train_config(effective):
    return training.TrainConfig(
        dim=effective["dim"],
        eta=effective["eta"],
        alpha=effective["alpha"],
        beta=effective["beta"],
        epochs=effective["epochs"],
        batch_size=effective["batch_size"],
        seed=effective["seed"],
        fairness_gap_form=effective["gap_form"],
    )


_TRAIN_DEFAULTS = {
    "dataset_edges": None,
    "dataset_nodes": None,
    "schema": "label=label,sensitive=sensitive",
    "dim": 4096,
    "eta": 1.0,
    "alpha": 0.0,
    "beta": 0.0,
    "epochs": 20,
    "batch_size": 256,
    "seed": 0,
    "gap_form": "multi",
    "train_fraction": 0.5,
    "mode": "full",
    "out": None,
}


def _add_dataset_flags(p):
    p.add_argument("--dataset-edges", dest="dataset_edges")
    p.add_argument("--dataset-nodes", dest="dataset_nodes")
    p.add_argument("--schema", help="label=COL,sensitive=COL[,features=a|b|c]")
    p.add_argument("--config", help="JSON config file; flags override its keys")


def _add_train_flags(p):
    p.add_argument("--dim", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--gap-form", dest="gap_form", choices=["multi", "binary"])
    p.add_argument("--train-fraction", dest="train_fraction", type=float)


def cmd_synth(args):
    defaults = {
        "nodes": 2000, "p_in": 0.01, "p_out": 0.002, "bias": 0.4,
        "label_flip": 0.05, "features": 64, "feature_signal": 0.32,
        "group_signal": 0.85, "seed": 0, "out": None,
    }
    effective = _merge_config(args, defaults)
    if not effective["out"]:
        _usage_error("synth requires --out")
    spec = data_mod.SyntheticSpec(
        nodes_per_block=effective["nodes"] // 2,
        p_in=effective["p_in"],
        p_out=effective["p_out"],
        bias=effective["bias"],
        label_flip=effective["label_flip"],
        num_binary_features=effective["features"],
        feature_signal=effective["feature_signal"],
        group_signal=effective["group_signal"],
        seed=effective["seed"],
    )
    dataset = data_mod.generate_synthetic(spec)
    out = Path(effective["out"])
    out.mkdir(parents=True, exist_ok=True)
    data_mod.save_dataset(dataset, out / "edges.txt", out / "nodes.csv")
    _write_manifest(out, "synth", effective)
    print(f"wrote {out / 'edges.txt'} and {out / 'nodes.csv'} "
          f"({dataset.num_nodes} nodes)")


def cmd_encode(args):
    effective = _merge_config(args, _TRAIN_DEFAULTS)
    if not effective["out"]:
        _usage_error("encode requires --out")
    dataset, _ = _load_dataset_from(effective)
    encoded = encode_graph(dataset, effective["dim"], effective["seed"])
    out = Path(effective["out"])
    out.mkdir(parents=True, exist_ok=True)
    save_encoded(out / "encoded.bin", encoded)
    _write_manifest(out, "encode", effective)
    print(f"wrote {out / 'encoded.bin'} (D={encoded.dim}, N={encoded.num_nodes})")


def cmd_train(args):
    effective = _merge_config(args, _TRAIN_DEFAULTS)
    if not effective["out"]:
        _usage_error("train requires --out")
    dataset, _ = _load_dataset_from(effective)
    cfg = _train_config(effective)
    data_mod.split(dataset, effective["train_fraction"], cfg.seed)
    encoded = encode_graph(dataset, cfg.dim, cfg.seed)
    model, traces = training.train(encoded, dataset, cfg)
    out = Path(effective["out"])
    out.mkdir(parents=True, exist_ok=True)
    training.save_model(out / "model.bin", model, mode=effective["mode"])
    training.save_traces(out / "trace.csv", traces)
    _write_manifest(out, "train", effective)
    print(f"wrote {out / 'model.bin'} and {out / 'trace.csv'}")


def cmd_eval(args):
    defaults = dict(_TRAIN_DEFAULTS)
    defaults.update({"model": None, "split": "test", "format": "kv"})
    effective = _merge_config(args, defaults)
    if not effective["model"]:
        _usage_error("eval requires --model")
    dataset, _ = _load_dataset_from(effective)
    model, _default_mode = training.load_model(effective["model"])
    mismatches = []
    if model.dim != effective["dim"]:
        mismatches.append(f"dim: model={model.dim} dataset-config={effective['dim']}")
    if model.num_classes != dataset.num_classes:
        mismatches.append(
            f"classes: model={model.num_classes} dataset={dataset.num_classes}"
        )
    if mismatches:
        print("model/dataset mismatch: " + "; ".join(mismatches), file=sys.stderr)
        raise SystemExit(EXIT_DATA)
    cfg = _train_config(effective)
    data_mod.split(dataset, effective["train_fraction"], cfg.seed)
    encoded = encode_graph(dataset, cfg.dim, cfg.seed)
    report = evaluation.evaluate(
        model, encoded, dataset, effective["split"], mode=effective["mode"]
    )
    text = report.to_table() if effective["format"] == "table" else report.to_kv()
    sys.stdout.write(text)
    if effective["out"]:
        out = Path(effective["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text)
        _write_manifest(out, "eval", effective)


def cmd_sweep(args):
    defaults = dict(_TRAIN_DEFAULTS)
    defaults.update({"alphas": None, "betas": None, "seeds": None})
    effective = _merge_config(args, defaults)
    if not effective["out"]:
        _usage_error("sweep requires --out")
    for key in ("alphas", "betas", "seeds"):
        if not effective[key]:
            _usage_error(f"sweep requires --{key}")
    dataset, _ = _load_dataset_from(effective)
    spec = evaluation.SweepSpec(
        alphas=[float(v) for v in effective["alphas"].split(",")],
        betas=[float(v) for v in effective["betas"].split(",")],
        seeds=[int(v) for v in effective["seeds"].split(",")],
        train_fraction=effective["train_fraction"],
    )
    out = Path(effective["out"])
    out.mkdir(parents=True, exist_ok=True)
    base_cfg = _train_config(effective)
    evaluation.sweep(dataset, base_cfg, spec, out / "results.jsonl",
                     mode=effective["mode"])
    evaluation.export_table(out / "results.jsonl", out / "tradeoff.csv")
    _write_manifest(out, "sweep", effective)
    for row in evaluation.aggregate(out / "results.jsonl"):
        print(json.dumps(row))


def cmd_bench(args):
    defaults = dict(_TRAIN_DEFAULTS)
    defaults.update({"sizes": "1000,2000,4000"})
    effective = _merge_config(args, defaults)
    sizes = [int(v) for v in effective["sizes"].split(",")]
    cfg = _train_config(effective)
    rows = evaluation.timing_benchmark(sizes, cfg)
    header = f"{'nodes':>8s} {'encode_s':>10s} {'train_s':>10s} {'infer_s':>10s} {'resid':>8s}"
    print(header)
    for r in rows:
        print(f"{r['nodes']:>8d} {r['encode']:>10.4f} {r['train']:>10.4f} "
              f"{r['infer']:>10.4f} {r['train_residual_rel']:>8.3f}")
    if effective["out"]:
        out = Path(effective["out"])
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "bench.json", "w") as fh:
            json.dump(rows, fh, indent=2)
        _write_manifest(out, "bench", effective)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fairhd",
        description="Fairness-aware graph hyperdimensional computing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic biased graph")
    p.add_argument("--nodes", type=int)
    p.add_argument("--p-in", dest="p_in", type=float)
    p.add_argument("--p-out", dest="p_out", type=float)
    p.add_argument("--bias", type=float)
    p.add_argument("--label-flip", dest="label_flip", type=float)
    p.add_argument("--features", type=int)
    p.add_argument("--feature-signal", dest="feature_signal", type=float)
    p.add_argument("--group-signal", dest="group_signal", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="precompute node hypervectors")
    _add_dataset_flags(p)
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train class hypervectors")
    _add_dataset_flags(p)
    _add_train_flags(p)
    p.add_argument("--mode", choices=["full", "quantized"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    _add_dataset_flags(p)
    _add_train_flags(p)
    p.add_argument("--model")
    p.add_argument("--mode", choices=["full", "quantized"])
    p.add_argument("--split", choices=["train", "test"])
    p.add_argument("--format", choices=["kv", "table"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="alpha/beta/seed grid search")
    _add_dataset_flags(p)
    _add_train_flags(p)
    p.add_argument("--alphas", help="comma-separated alpha grid")
    p.add_argument("--betas", help="comma-separated beta grid")
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--mode", choices=["full", "quantized"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="training-time scaling benchmark")
    _add_train_flags(p)
    p.add_argument("--sizes", help="comma-separated node counts")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_DATA) from None
    except FairHDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_RUNTIME) from None
    return 0


if __name__ == "__main__":
    sys.exit(main())
