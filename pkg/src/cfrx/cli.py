"""Command-line pipeline: generate data, train and evaluate models, explain
instances, rank features, and serve the HTTP API.

Every run logs its seed, writes JSON artifacts with sorted keys (so repeat
runs are byte-identical), and renders figures next to the delimited output
when --plots is given. Exit codes: 0 success, 1 runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .cftypes import CFQuery
from .data import SynthConfig, load_csv, mad_vector, save_csv, synth_generate
from .errors import CfrxError
from .importance import global_importance, importance_to_csv, local_importance
from .metrics import compute_metrics, cross_validate
from .models import ModelConfig, fit_model, load_model, save_model
from .schema import FeatureSchema, default_hamd_schema
from .search import generate


def _log(msg: str) -> None:
    print(f"[cfrx] {msg}", file=sys.stderr)


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_schema(args) -> FeatureSchema:
    if getattr(args, "schema", None):
        return FeatureSchema.from_json(Path(args.schema).read_text(encoding="utf-8"))
    return default_hamd_schema()


def _load_instance(path, schema: FeatureSchema) -> np.ndarray:
    """Instance files carry either {"values": [...]} or a feature->value map."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, dict) and "values" in doc:
        values = doc["values"]
    elif isinstance(doc, dict):
        missing = [n for n in schema.feature_names if n not in doc]
        if missing:
            raise CfrxError(f"instance file missing features: {missing}")
        values = [doc[n] for n in schema.feature_names]
    else:
        values = doc
    return schema.validate_row(values)


def _immutable_set(args) -> frozenset:
    names = []
    for chunk in args.immutable or []:
        names.extend(n.strip() for n in chunk.split(",") if n.strip())
    return frozenset(names)


def _mads_for(args, schema) -> np.ndarray:
    if getattr(args, "data", None):
        return mad_vector(load_csv(args.data, schema))
    return np.ones(schema.n_features)


# --- subcommands ---

def cmd_gen_data(args) -> int:
    config = SynthConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    _log(f"seed={args.seed}")
    ds = synth_generate(config, seed=args.seed)
    save_csv(ds, args.out)
    _log(f"wrote {len(ds)} rows to {args.out}")
    if args.schema_out:
        Path(args.schema_out).write_text(config.schema.to_json() + "\n", encoding="utf-8")
        _log(f"wrote schema to {args.schema_out}")
    return 0


def cmd_train(args) -> int:
    schema = _load_schema(args)
    ds = load_csv(args.data, schema)
    config = ModelConfig(
        kind=args.model_kind,
        n_trees=args.n_trees,
        max_depth=args.max_depth,
        min_leaf=args.min_leaf,
        feature_subsample=args.feature_subsample,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        l2=args.l2,
    )
    _log(f"seed={args.seed}")
    metrics_doc = {"seed": args.seed, "model_kind": args.model_kind}
    metrics_out = args.metrics_out
    if args.cv:
        result = cross_validate(ds, config, k=args.cv, seed=args.seed, smote=args.smote)
        metrics_doc["cv"] = result.to_dict()
        _log(f"{args.cv}-fold CV mean accuracy {result.mean_report.accuracy:.4f}")
        if not metrics_out:  # cross-validated training always leaves a metrics artifact
            metrics_out = str(Path(args.out).with_suffix("")) + ".metrics.json"
    train = ds
    if args.smote:
        from .data import smote_oversample
        train = smote_oversample(ds, seed=args.seed)
        _log(f"oversampled {len(ds)} -> {len(train)} rows")
    model = fit_model(config, train.encoded(), train.y, seed=args.seed)
    save_model(model, schema, args.out)
    _log(f"wrote model to {args.out}")
    if metrics_out:
        _write_json(metrics_doc, metrics_out)
        _log(f"wrote metrics to {metrics_out}")
    return 0


def cmd_evaluate(args) -> int:
    schema = _load_schema(args)
    ds = load_csv(args.data, schema)
    model = load_model(args.model, schema)
    _log(f"seed={args.seed}")
    scores = model.predict_proba(ds.encoded())
    report = compute_metrics(scores, ds.y)
    _write_json(report.to_dict(), args.out)
    _log(f"accuracy {report.accuracy:.4f} on {report.n} rows; wrote {args.out}")
    if args.csv_out:
        with open(args.csv_out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["accuracy", "f1", "precision", "recall", "roc_auc", "tn", "fp", "fn", "tp"])
            cm = report.confusion
            writer.writerow([report.accuracy, report.f1, report.precision, report.recall,
                             report.roc_auc, cm["tn"], cm["fp"], cm["fn"], cm["tp"]])
    if args.plots:
        from .plots import save_confusion_matrix_png
        Path(args.plots).mkdir(parents=True, exist_ok=True)
        out = Path(args.plots) / "confusion_matrix.png"
        save_confusion_matrix_png(report.confusion, out)
        _log(f"wrote {out}")
    return 0


def cmd_explain(args) -> int:
    schema = _load_schema(args)
    model = load_model(args.model, schema)
    origin = _load_instance(args.instance, schema)
    mads = _mads_for(args, schema)
    query = CFQuery(
        origin=origin,
        target_class=args.target,
        k=args.k,
        immutable=_immutable_set(args),
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        optimizer=args.optimizer,
        seed=args.seed,
        budget=args.budget,
    )
    _log(f"seed={args.seed}")
    result = generate(query, model, schema, mads=mads)
    _write_json(result.to_dict(schema), args.out)
    _log(f"{len(result.cfs)} counterfactual(s), objective {result.objective_value:.4f}; wrote {args.out}")
    if args.csv_out:
        with open(args.csv_out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cf_index", "feature", "old", "new", "delta"])
            for i, cf in enumerate(result.cfs):
                for d in cf.diff:
                    writer.writerow([i, d.feature, d.old, d.new, d.delta])
    if args.plots:
        from .plots import save_cf_diff_png
        Path(args.plots).mkdir(parents=True, exist_ok=True)
        out = Path(args.plots) / "counterfactual_diffs.png"
        save_cf_diff_png(result, schema, out)
        _log(f"wrote {out}")
    return 0


def cmd_importance(args) -> int:
    schema = _load_schema(args)
    model = load_model(args.model, schema)
    _log(f"seed={args.seed}")
    if args.instance:
        origin = _load_instance(args.instance, schema)
        mads = _mads_for(args, schema)
        report = local_importance(origin, model, schema, mads=mads, k=args.k,
                                  constraints=_immutable_set(args), seed=args.seed)
    else:
        if not args.data:
            raise CfrxError("global importance needs --data")
        ds = load_csv(args.data, schema)
        report = global_importance(ds, model, schema, mads=mad_vector(ds), k=args.k,
                                   seed=args.seed, limit=args.limit)
    _write_json(report.to_dict(), args.out)
    top = report.ranked()[:3]
    _log(f"{report.scope} importance over {report.instances_covered} instance(s), "
         f"top: {', '.join(f'{n}={s:.2f}' for n, s in top)}; wrote {args.out}")
    if args.csv_out:
        Path(args.csv_out).write_text(importance_to_csv(report), encoding="utf-8")
    if args.plots:
        from .plots import save_importance_png
        Path(args.plots).mkdir(parents=True, exist_ok=True)
        out = Path(args.plots) / f"importance_{report.scope}.png"
        save_importance_png(report, out)
        _log(f"wrote {out}")
    return 0


def cmd_serve(args) -> int:
    from .service import ExplainerService, make_server

    schema = _load_schema(args)
    model = load_model(args.model, schema)
    dataset = load_csv(args.data, schema) if args.data else None
    service = ExplainerService(model, schema, dataset=dataset,
                               global_k=args.k, global_limit=args.global_limit,
                               seed=args.seed)
    server = make_server(service, args.host, args.port)
    _log(f"seed={args.seed}")
    _log(f"serving on http://{args.host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        _log("shutting down")
        server.shutdown()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfrx",
        description="Counterfactual what-if engine for ordinal symptom data")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset from a config")
    p.add_argument("--config", required=True, help="SynthConfig JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--schema-out", help="also write the schema JSON here")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="fit a model, optionally with cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--model-kind", choices=["forest", "tree", "logistic"], default="forest")
    p.add_argument("--cv", type=int, default=0, help="number of folds (0 = skip)")
    p.add_argument("--smote", action="store_true", help="oversample the minority class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--feature-subsample", type=float, default=0.6)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--metrics-out", help="metrics JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model on a labeled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="metrics JSON path")
    p.add_argument("--csv-out", help="delimited metrics summary")
    p.add_argument("--plots", help="directory for the confusion-matrix figure")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="generate counterfactuals for one instance")
    p.add_argument("--model", required=True)
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument("--target", type=int, choices=[0, 1], required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--immutable", action="append",
                   help="feature to pin (repeat or comma-separate)")
    p.add_argument("--lambda1", type=float, default=0.5)
    p.add_argument("--lambda2", type=float, default=1.0)
    p.add_argument("--optimizer", choices=["evolutionary", "gradient"], default="evolutionary")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=20000)
    p.add_argument("--data", help="dataset CSV used for MAD normalization")
    p.add_argument("--schema")
    p.add_argument("--out", required=True, help="counterfactual set JSON path")
    p.add_argument("--csv-out", help="delimited per-change rows")
    p.add_argument("--plots", help="directory for the change-arrow figure")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("importance", help="change-frequency feature importance")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="dataset CSV (required for global scope)")
    p.add_argument("--instance", help="instance JSON file (switches to local scope)")
    p.add_argument("--schema")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, help="cap on instances for global scope")
    p.add_argument("--immutable", action="append",
                   help="feature to pin in local scope (repeat or comma-separate)")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--csv-out", help="sorted feature,score rows")
    p.add_argument("--plots", help="directory for the bar-chart figure")
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("serve", help="run the HTTP JSON service")
    p.add_argument("--model", required=True)
    p.add_argument("--schema")
    p.add_argument("--data", help="dataset CSV for MADs and global importance")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8351)
    p.add_argument("--k", type=int, default=10, help="k for the cached global report")
    p.add_argument("--global-limit", type=int, default=50,
                   help="cap on instances for the cached global report")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CfrxError as e:
        _log(f"error in {args.command}: {type(e).__name__}: {e}")
        return 1
    except OSError as e:
        _log(f"error in {args.command}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
