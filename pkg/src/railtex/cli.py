"""Command-line entry point.

Subcommands: synth, extract, train, eval, predict, report. Every failure
exits nonzero with a message naming the failing stage.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .dataset import ingest_dataset
from .errors import RailTexError
from .metrics import METRIC_ORDER
from .model_store import load_model
from .pipeline import (
    CLASSIFIER_KINDS,
    extract_dataset_features,
    predict_image,
    run_experiment,
    train_model,
    evaluate_model,
    write_features_csv,
)
from .synth import generate_synthetic_dataset
from .texture import feature_schema


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="railtex", description="Rail surface defect classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the seeded synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--per-class", type=int, required=True, help="images per class")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)

    p = sub.add_parser("extract", help="preprocess the dataset and write the features CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("train", help="fit on the training split and save the model file")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--classifier", choices=list(CLASSIFIER_KINDS) + ["all"])

    p = sub.add_parser("eval", help="train and evaluate (or evaluate a saved model)")
    p.add_argument("--config", required=True)
    p.add_argument("--model", help="evaluate this saved model instead of training")
    p.add_argument("--classifier", choices=list(CLASSIFIER_KINDS) + ["all"])

    p = sub.add_parser("predict", help="classify one image with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("image")

    p = sub.add_parser("report", help="re-render a JSON report as a text table")
    p.add_argument("--json", required=True, dest="json_path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except RailTexError as exc:
        print(f"railtex {args.command}: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "synth":
        out = generate_synthetic_dataset(args.out, args.per_class, args.seed, size=(args.width, args.height))
        print(f"wrote synthetic dataset under {out}")
        return 0

    if args.command == "extract":
        cfg = load_config(args.config)
        index = ingest_dataset(cfg.dataset_root)
        rows = list(range(len(index.entries)))
        features = extract_dataset_features(index, cfg, rows)
        write_features_csv(args.out, index, rows, features, feature_schema(cfg.feature_config()))
        print(f"wrote {len(rows)} feature rows to {args.out}")
        return 0

    if args.command == "train":
        cfg = load_config(args.config)
        cfg = _override(cfg, model_file=args.model, classifier=args.classifier)
        paths = train_model(cfg)
        for path in paths:
            print(f"saved model {path}")
        return 0

    if args.command == "eval":
        cfg = load_config(args.config)
        if args.model:
            bundle = load_model(args.model)
            report = evaluate_model(bundle, cfg)
            _print_report_lines([report])
            return 0
        cfg = _override(cfg, classifier=args.classifier)
        reports = run_experiment(cfg)
        _print_report_lines(list(reports.values()))
        print(f"reports written to {cfg.report_dir}")
        return 0

    if args.command == "predict":
        bundle = load_model(args.model)
        label, scores = predict_image(bundle, args.image)
        print(f"class: {label}")
        for name, score in scores.items():
            print(f"  {name}: {score:.6f}")
        return 0

    if args.command == "report":
        path = Path(args.json_path)
        if not path.is_file():
            raise RailTexError(f"report file not found: {path}")
        doc = json.loads(path.read_text())
        _render_report_dict(doc)
        return 0

    raise RailTexError(f"unknown command {args.command!r}")


def _override(cfg, **kwargs):
    updates = {k: v for k, v in kwargs.items() if v is not None}
    return replace(cfg, **updates) if updates else cfg


def _print_report_lines(reports) -> None:
    for report in reports:
        macro = report.macro
        cells = "  ".join(f"{m}={v:.5f}" for m, v in zip(METRIC_ORDER, macro.values()))
        print(f"{report.classifier}: {cells}")


def _render_report_dict(doc: dict) -> None:
    names = doc["class_names"]
    print(f"classifier: {doc['classifier']}  (seed {doc['seed']}, {doc['averaging']} averaging)")
    header = ["metric"] + names + ["macro"]
    print("  ".join(f"{h:>12}" if i else f"{h:<12}" for i, h in enumerate(header)))
    for metric in METRIC_ORDER:
        cells = [doc["per_class"][n]["metrics"][metric] for n in names] + [doc["macro"]["metrics"][metric]]
        row = [f"{metric:<12}"] + [f"{c:>12.5f}" for c in cells]
        print("  ".join(row))


if __name__ == "__main__":
    sys.exit(main())
