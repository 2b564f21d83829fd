"""Command-line front end.

    sfcrime summarize train.csv
    sfcrime featurize train.csv --out features.csv --pca-components 3
    sfcrime evaluate train.csv --model nb
    sfcrime sweep train.csv --model forest --grid n_estimators=10,20,50 --max-depth 13
    sfcrime train train.csv --model forest --n-estimators 200 --max-depth 13 --out model.json
    sfcrime predict model.json test.csv --out submission.csv

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 numeric failure.
Options may also come from a JSON object passed with ``--config``; keys are
the long option names with dashes replaced by underscores, and flags given on
the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import ingest
from .errors import DataError, ParameterError, SfCrimeError
from .evaluation import SplitSpec, multiclass_log_loss, run_sweep, write_submission
from .features import EncodingMaps, build_feature_matrix, read_feature_csv, write_feature_csv
from .models import PARAMS, make_model, model_from_dict
from .pca import PcaModel
from .pipeline import prepare_full, prepare_split

log = logging.getLogger("sfcrime")

MODEL_FORMAT = "sfcrime-model/1"
N_CATEGORIES = 39

# Gradient-boosted trees are not implemented; published validation scores are
# shown for comparison only.
BOOSTED_REFERENCE = (
    "gradient-boosted trees (not implemented), published validation log-loss by max_depth: "
    "3: 2.573599576, 4: 2.573666882, 5: 2.568169744, 6: 2.565219931"
)

# CLI option name -> model hyperparameter name.
MODEL_OPTIONS = {
    "neighbors": "k",
    "max_depth": "max_depth",
    "min_samples_leaf": "min_samples_leaf",
    "features_per_split": "features_per_split",
    "n_estimators": "n_estimators",
    "bootstrap": "bootstrap",
    "alpha": "alpha",
}


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {text!r}")


def _parse_value(family: str, name: str, text):
    kinds = PARAMS[family]
    if name not in kinds:
        raise ParameterError(f"{family} does not take parameter {name!r}")
    kind = kinds[name]
    if isinstance(text, str) and text.lower() == "none" and name in ("max_depth", "features_per_split"):
        return None
    try:
        return _parse_bool(text) if kind is bool else kind(text)
    except ValueError:
        raise ParameterError(f"bad value for {name}: {text!r}") from None


def _parse_assignments(items, family):
    out = {}
    for item in items or []:
        if isinstance(item, str):
            name, sep, value = item.partition("=")
            if not sep:
                raise ParameterError(f"expected NAME=VALUE, got {item!r}")
            out[name.strip()] = _parse_value(family, name.strip(), value.strip())
        else:
            raise ParameterError(f"bad parameter {item!r}")
    return out


def _parse_grid(items, family):
    """``--grid name=v1,v2`` items -> ordered {name: [values]}."""
    grid = {}
    for item in items or []:
        name, sep, values = item.partition("=")
        if not sep or not values.strip():
            raise ParameterError(f"expected NAME=V1,V2,..., got {item!r}")
        name = name.strip()
        grid[name] = [_parse_value(family, name, v.strip()) for v in values.split(",")]
    if not grid:
        raise ParameterError("sweep needs at least one --grid NAME=V1,V2,...")
    return grid


def model_params(args) -> dict:
    """Hyperparameters for ``args.model`` from the dedicated options and --param."""
    family = args.model
    accepted = PARAMS[family]
    params = {}
    for opt, name in MODEL_OPTIONS.items():
        value = getattr(args, opt, None)
        if value is None:
            continue
        if name not in accepted:
            raise ParameterError(f"--{opt.replace('_', '-')} does not apply to model {family!r}")
        params[name] = value
    params.update(_parse_assignments(args.param, family))
    if "seed" in accepted:
        params.setdefault("seed", args.seed)
    if "threads" in accepted:
        params.setdefault("threads", args.threads)
    return params


def _split_spec(args) -> SplitSpec:
    return SplitSpec(args.validation_fraction, args.seed, not args.no_stratify)


def _load_train(args):
    rows = ingest.load_train(args.train, filter_outliers=args.filter_outliers)
    if not rows:
        raise DataError(f"{args.train}: no data rows")
    return rows


def _check_pca(k):
    if not 0 <= k <= 8:
        raise ParameterError(f"--pca-components must be in 0..8, got {k}")


# ---------------------------------------------------------------- commands

def cmd_summarize(args) -> int:
    rows = ingest.load_train(args.train, filter_outliers=args.filter_outliers)
    sys.stdout.write(ingest.render_summary(ingest.summarize(rows)))
    return 0


def cmd_featurize(args) -> int:
    _check_pca(args.pca_components)
    prep = prepare_full(_load_train(args), args.pca_components)
    write_feature_csv(prep.train, args.out, prep.maps.categories)
    log.info("wrote %d x %d features to %s", *prep.train.values.shape, args.out)
    if args.test:
        test_rows = ingest.load_test(args.test)
        fm = build_feature_matrix(test_rows, prep.maps, prep.pca)
        write_feature_csv(fm, args.test_out or Path(args.out).with_suffix(".test.csv"))
    return 0


def cmd_evaluate(args) -> int:
    _check_pca(args.pca_components)
    params = model_params(args)
    prep = prepare_split(_load_train(args), args.pca_components, _split_spec(args))
    n_classes = len(prep.maps.category_index)
    model = make_model(args.model, **params).fit(prep.train.values, prep.train.labels, n_classes)
    loss = multiclass_log_loss(model.predict_proba(prep.validation.values), prep.validation.labels)
    print(f"model: {args.model}")
    print(f"train rows: {len(prep.train)}  validation rows: {len(prep.validation)}")
    print(f"validation log-loss: {loss:.9f}")
    return 0


def cmd_sweep(args) -> int:
    _check_pca(args.pca_components)
    base = model_params(args)
    grid = _parse_grid(args.grid, args.model)
    prep = prepare_split(_load_train(args), args.pca_components, _split_spec(args))
    report = run_sweep(None, args.model, grid, base_params=base,
                       n_classes=len(prep.maps.category_index),
                       split_data=(prep.train, prep.validation))
    if args.show_references:
        report.references.append(BOOSTED_REFERENCE)
    sys.stdout.write(report.render(timing=args.timing))
    if args.out:
        Path(args.out).write_text(report.to_csv(timing=args.timing), encoding="utf-8")
    return 0


def cmd_train(args) -> int:
    _check_pca(args.pca_components)
    params = model_params(args)
    prep = prepare_full(_load_train(args), args.pca_components)
    model = make_model(args.model, **params).fit(prep.train.values, prep.train.labels,
                                                 len(prep.maps.category_index))
    out = Path(args.out)
    doc = {"format": MODEL_FORMAT, "family": args.model,
           "params": {k: v for k, v in params.items() if k != "threads"},
           "pca_components": args.pca_components, "pca_file": None,
           "encodings": prep.maps.to_dict()}
    if prep.pca is not None:
        pca_path = out.with_name(out.name + ".pca")
        prep.pca.save(pca_path)
        doc["pca_file"] = pca_path.name
    if args.model == "knn":
        feat_path = out.with_name(out.name + ".features.csv")
        write_feature_csv(prep.train, feat_path, prep.maps.categories)
        doc["model"] = model.to_dict(feat_path.name)
    else:
        doc["model"] = model.to_dict()
    out.write_text(json.dumps(doc) + "\n", encoding="utf-8")
    log.info("wrote %s", out)
    return 0


def load_model_file(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{path}: no such model file") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a model file ({exc})") from None
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: unsupported model format {doc.get('format')!r}")
    maps = EncodingMaps.from_dict(doc["encodings"])
    pca = PcaModel.load(path.with_name(doc["pca_file"])) if doc.get("pca_file") else None
    knn_features = None
    if doc["model"]["type"] == "knn":
        knn_features = read_feature_csv(path.with_name(doc["model"]["features_path"]),
                                        maps.category_index)
    return doc, maps, pca, model_from_dict(doc["model"], knn_features)


def cmd_predict(args) -> int:
    doc, maps, pca, model = load_model_file(args.model_file)
    if hasattr(model, "threads"):
        model.threads = args.threads
    rows = ingest.load_test(args.test)
    fm = build_feature_matrix(rows, maps, pca)
    proba = model.predict_proba(fm.values)
    write_submission([r.id for r in rows], proba, maps.categories, args.out, N_CATEGORIES)
    log.info("wrote %d predictions to %s", len(rows), args.out)
    return 0


# ---------------------------------------------------------------- parser

def _common(p, train=True):
    p.add_argument("--config", help="JSON file of option values (flags win)")
    p.add_argument("--seed", type=int, default=42, help="seed for all randomness (default 42)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (default: available cores)")
    p.add_argument("-v", "--verbose", action="store_true")
    if train:
        p.add_argument("train", help="Kaggle train.csv")
        p.add_argument("--filter-outliers", action="store_true",
                       help=f"drop rows with latitude >= {ingest.OUTLIER_LATITUDE}")
        p.add_argument("--pca-components", type=int, default=3, help="PCA scores to append, 0 disables")


def _model_opts(p, required=True):
    p.add_argument("--model", choices=sorted(PARAMS), required=required)
    p.add_argument("--neighbors", type=int, help="kNN: neighbour count k")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-leaf", type=int)
    p.add_argument("--features-per-split", type=int)
    p.add_argument("--n-estimators", type=int)
    p.add_argument("--no-bootstrap", dest="bootstrap", action="store_const", const=False)
    p.add_argument("--alpha", type=float, help="leaf Laplace smoothing (default 1)")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="any model hyperparameter")


def _split_opts(p):
    p.add_argument("--validation-fraction", type=float, default=0.3)
    p.add_argument("--no-stratify", action="store_true")


def build_parser() -> Parser:
    ap = Parser(prog="sfcrime", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("summarize", help="dataset tables and histograms")
    _common(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("featurize", help="export the feature matrix as CSV")
    _common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--test", help="also featurize this test.csv")
    p.add_argument("--test-out")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("evaluate", help="validation log-loss of one model")
    _common(p)
    _model_opts(p)
    _split_opts(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="validation log-loss over a hyperparameter grid")
    _common(p)
    _model_opts(p)
    _split_opts(p)
    p.add_argument("--grid", action="append", metavar="NAME=V1,V2,...", required=False)
    p.add_argument("--out", help="write the report as CSV")
    p.add_argument("--timing", action="store_true", help="include wall-clock seconds (not reproducible)")
    p.add_argument("--show-references", action="store_true",
                   help="append published gradient-boosted tree scores")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("train", help="fit a model on all training rows and save it")
    _common(p)
    _model_opts(p)
    p.add_argument("--out", required=True, help="model file (JSON)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write a Kaggle submission from a saved model")
    _common(p, train=False)
    p.add_argument("model_file")
    p.add_argument("test", help="Kaggle test.csv")
    p.add_argument("--out", required=True, help="submission CSV")
    p.set_defaults(func=cmd_predict)
    return ap


def _apply_config(parser: Parser, argv):
    """Parse ``argv`` with config-file values installed as subcommand defaults."""
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((tok for tok in argv if tok in choices), None)
    if not known.config or command is None:
        return parser.parse_args(argv)
    try:
        cfg = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{known.config}: no such config file") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{known.config}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ParameterError(f"{known.config}: expected a JSON object")
    subparser = choices[command]
    known_dests = {a.dest for a in subparser._actions if a.option_strings}
    unknown = set(cfg) - known_dests
    if unknown:
        raise ParameterError(f"{known.config}: unknown or positional option(s) {', '.join(sorted(unknown))}")
    if isinstance(cfg.get("grid"), dict):
        cfg["grid"] = [f"{k}={','.join(map(str, v)) if isinstance(v, list) else v}"
                       for k, v in cfg["grid"].items()]
    # Repeatable options given as flags replace, rather than extend, the config list.
    for dest in ("grid", "param"):
        if dest in cfg and f"--{dest}" in argv:
            del cfg[dest]
    subparser.set_defaults(**cfg)
    for action in subparser._actions:
        if action.dest in cfg and action.required:
            action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if getattr(args, "threads", 1) < 1:
            raise ParameterError("--threads must be >= 1")
        return args.func(args)
    except SfCrimeError as exc:
        print(f"sfcrime: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"sfcrime: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
