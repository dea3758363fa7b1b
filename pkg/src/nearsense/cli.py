"""Command-line interface.

One executable, six subcommands: ``generate``, ``extract``, ``train``,
``evaluate``, ``ablate``, ``pipeline``. Settings come from an optional JSON
config file; flags override the file. Exit codes: 0 success, 1 usage or
configuration error, 2 data error, 3 training error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config as cfg
from . import evaluation as ev
from .classifiers import (
    GaussianNaiveBayes,
    MultilayerPerceptron,
    SMOClassifier,
    load_model,
    save_model,
)
from .errors import ConfigError, DataError, NearsenseError, TrainingError
from .features import instances_to_frame, read_feature_matrix, write_feature_matrix
from .ingest import (
    assemble_instances,
    parse_log,
    read_labels,
    windowize,
    write_labels,
    write_raw_log,
    write_window_manifest,
)
from .selection import InfoGainSelector, write_ranking
from .signals import gen_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRAINING = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON run configuration file")
    p.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory")


def build_parser() -> _Parser:
    parser = _Parser(prog="nearsense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="synthesize a raw sensor log + label sidecar")
    _add_common(p)
    p.add_argument("--sensors", metavar="IDS", help="comma-separated sensor subset")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("extract", help="windows + features from a raw log")
    _add_common(p)
    p.add_argument("--log", metavar="PATH", required=True, help="raw readings CSV")
    p.add_argument("--labels", metavar="PATH", help="window label sidecar CSV")
    p.add_argument("--window", type=int, metavar="N", help="readings per window")
    p.add_argument(
        "--literal-telescoping",
        action="store_true",
        help="sum signed (telescoping) peak differences",
    )
    p.add_argument(
        "--include-gcs-pdf",
        action="store_true",
        help="also emit the PDF-transform coverage span features",
    )
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="rank features and fit a classifier")
    _add_common(p)
    p.add_argument("--matrix", metavar="PATH", required=True, help="feature matrix CSV")
    p.add_argument("--algo", choices=("smo", "nb", "mlp"), help="classifier algorithm")
    p.add_argument("--keep", metavar="RULE", help="positive | all | top:<k>")
    p.add_argument("--stratified", action="store_true", help="stratify the 60/40 split")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model on the held-out fold")
    _add_common(p)
    p.add_argument("--matrix", metavar="PATH", required=True, help="feature matrix CSV")
    p.add_argument("--model", metavar="PATH", help="model file from 'train'")
    p.add_argument("--algo", choices=("smo", "nb", "mlp"), help="classifier algorithm")
    p.add_argument("--keep", metavar="RULE", help="positive | all | top:<k>")
    p.add_argument("--stratified", action="store_true", help="stratify the 60/40 split")
    p.add_argument("--roc", action="store_true", help="also render the ROC curve as SVG")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="leave-one-sensor-out sweep")
    _add_common(p)
    p.add_argument("--matrix", metavar="PATH", required=True, help="feature matrix CSV")
    p.add_argument("--algo", choices=("smo", "nb", "mlp"), help="classifier algorithm")
    p.add_argument("--keep", metavar="RULE", help="positive | all | top:<k>")
    p.add_argument("--stratified", action="store_true", help="stratify the 60/40 split")
    p.add_argument(
        "--subset",
        metavar="IDS",
        help="evaluate one model restricted to these sensors instead of sweeping",
    )
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("pipeline", help="generate, extract, train, and evaluate")
    _add_common(p)
    p.add_argument("--algo", choices=("smo", "nb", "mlp"), help="classifier algorithm")
    p.add_argument("--keep", metavar="RULE", help="positive | all | top:<k>")
    p.add_argument("--stratified", action="store_true", help="stratify the 60/40 split")
    p.add_argument(
        "--literal-telescoping",
        action="store_true",
        help="sum signed (telescoping) peak differences",
    )
    p.set_defaults(func=cmd_pipeline)

    return parser


def _load_run_config(args) -> cfg.RunConfig:
    run = cfg.load_config(args.config) if args.config else cfg.default_config()
    if args.seed is not None:
        run = cfg.RunConfig(
            seed=args.seed,
            window_size=run.window_size,
            generator=run.generator,
            features=run.features,
            selection=run.selection,
            train=run.train,
            split=run.split,
        )
    return run


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _algo(args, run: cfg.RunConfig) -> str:
    return args.algo if getattr(args, "algo", None) else run.train.algorithm


def _keep(args, run: cfg.RunConfig) -> str:
    return args.keep if getattr(args, "keep", None) else run.selection.keep


def _stratified(args, run: cfg.RunConfig) -> bool:
    return bool(getattr(args, "stratified", False)) or run.split.stratified


def build_classifier(run: cfg.RunConfig, algo: str):
    """Instantiate the configured classifier with the run seed."""
    train = run.train
    if algo == "smo":
        return SMOClassifier(
            C=train.smo.C,
            tolerance=train.smo.tolerance,
            kernel=train.smo.kernel,
            normalize=train.normalize_inputs,
        )
    if algo == "nb":
        return GaussianNaiveBayes(
            sigma_floor_fraction=train.nb.sigma_floor_fraction,
            normalize=train.normalize_inputs,
        )
    if algo == "mlp":
        return MultilayerPerceptron(
            hidden_units=train.mlp.hidden_units,
            learning_rate=train.mlp.learning_rate,
            momentum=train.mlp.momentum,
            epochs=train.mlp.epochs,
            seed=run.seed,
            normalize=train.normalize_inputs,
        )
    raise ConfigError(f"unknown algorithm {algo!r}")


def _select_profiles(run: cfg.RunConfig, sensors_arg: str | None):
    profiles = run.generator.sensors
    if not profiles:
        raise ConfigError("configuration defines no sensors")
    if not sensors_arg:
        return profiles
    wanted = [s.strip() for s in sensors_arg.split(",") if s.strip()]
    known = {p.sensor_id: p for p in profiles}
    unknown = [s for s in wanted if s not in known]
    if unknown:
        raise ConfigError(
            f"unknown sensors: {', '.join(unknown)}; "
            f"valid: {', '.join(known)}"
        )
    return tuple(known[s] for s in wanted)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    run = _load_run_config(args)
    out = _out_dir(args)
    profiles = _select_profiles(run, args.sensors)
    traces, labels = gen_dataset(
        profiles,
        run.generator.n_control_windows,
        run.generator.n_near_windows,
        run.seed,
    )
    write_raw_log(traces, out / "readings.csv")
    write_labels(labels, out / "labels.csv")
    n = sum(len(t) for t in traces.values())
    print(f"wrote {out / 'readings.csv'} ({n} readings, {len(traces)} sensors)")
    print(f"wrote {out / 'labels.csv'} ({len(labels)} windows)")
    return EXIT_OK


def _extract_frames(args, run: cfg.RunConfig, log_path, labels_path, out: Path):
    traces = parse_log(log_path)
    labels = None
    if labels_path and Path(labels_path).exists():
        labels = read_labels(labels_path)
    else:
        warnings.warn(
            "no label sidecar; extracting an unlabeled matrix", stacklevel=2
        )
    w_r = args.window if getattr(args, "window", None) else run.window_size
    windows = {sid: windowize(trace, w_r) for sid, trace in traces.items()}
    windows = {sid: wins for sid, wins in windows.items() if wins}
    if not windows:
        raise DataError("no sensor produced a complete window")
    write_window_manifest(windows, out / "manifest.csv")
    instances = assemble_instances(windows, labels)
    literal = bool(getattr(args, "literal_telescoping", False)) or run.features.literal_telescoping
    X, y = instances_to_frame(
        instances,
        literal_telescoping=literal,
        include_gcs_pdf=run.features.include_gcs_pdf,
    )
    return X, y


def cmd_extract(args) -> int:
    run = _load_run_config(args)
    out = _out_dir(args)
    X, y = _extract_frames(args, run, args.log, args.labels, out)
    write_feature_matrix(X, y, out / "features.csv")
    print(f"wrote {out / 'features.csv'} ({X.shape[0]} instances x {X.shape[1]} features)")
    return EXIT_OK


def _require_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=object)
    missing = [
        lbl is None or (isinstance(lbl, float) and math.isnan(lbl)) for lbl in y
    ]
    if any(missing):
        raise DataError(
            f"feature matrix is unlabeled on {sum(missing)} of {len(y)} rows; "
            f"a fully labeled matrix is required"
        )
    return y.astype(str)


def cmd_train(args) -> int:
    run = _load_run_config(args)
    out = _out_dir(args)
    X, y = read_feature_matrix(args.matrix)
    y = _require_labels(y)
    train_idx, _ = ev.train_test_indices(y, run.seed, _stratified(args, run))
    X_train, y_train = X.iloc[train_idx], y[train_idx]
    selector = InfoGainSelector(keep=_keep(args, run))
    selector.fit(X_train, y_train)
    X_sel = selector.transform(X_train)
    model = build_classifier(run, _algo(args, run))
    model.fit(X_sel, y_train)
    save_model(model, out / "model.json")
    write_ranking(selector.ranking_, out / "ranking.csv")
    print(
        f"wrote {out / 'model.json'} ({model.algorithm}, "
        f"{len(selector.selected_features_)} features, {len(train_idx)} instances)"
    )
    print(f"wrote {out / 'ranking.csv'}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    run = _load_run_config(args)
    out = _out_dir(args)
    X, y = read_feature_matrix(args.matrix)
    y = _require_labels(y)
    stratified = _stratified(args, run)

    if args.model:
        model = load_model(args.model)
        _, test_idx = ev.train_test_indices(y, run.seed, stratified)
        X_test, y_test = X.iloc[test_idx], y[test_idx]
        if model.feature_names_in_ is not None:
            missing = [c for c in model.feature_names_in_ if c not in X.columns]
            if missing:
                raise DataError(
                    f"matrix lacks columns the model was fit on: {', '.join(missing)}"
                )
            X_test = X_test.loc[:, model.feature_names_in_]
        positive = str(model.classes_[1])
        predictions = model.predict(X_test)
        scores = model.positive_score(X_test)
        cm = ev.ConfusionMatrix.from_predictions(y_test, predictions, positive)
        points, auc = ev.roc_curve(y_test, scores, positive)
        report = ev.EvalReport(
            confusion=cm,
            metrics=ev.metrics_from_confusion(cm),
            roc_points=points,
            auc=auc,
            n_train=len(y) - len(test_idx),
            n_test=len(test_idx),
            selected_features=list(model.feature_names_in_ or []),
        )
        algo = model.algorithm
    else:
        algo = _algo(args, run)
        report = ev.evaluate_run(
            X,
            y,
            lambda: build_classifier(run, algo),
            run.seed,
            stratified,
            InfoGainSelector(keep=_keep(args, run)),
        )

    extra = {"algorithm": algo, "seed": run.seed, "stratified": stratified}
    ev.write_report(report, out / "report.csv", extra=extra)
    ev.write_roc_points(report.roc_points, out / "roc_points.csv")
    if args.roc:
        ev.roc_svg(report.roc_points, out / "roc.svg", title=f"ROC ({algo})")
        print(f"wrote {out / 'roc.svg'}")
    print(f"wrote {out / 'report.csv'} (accuracy {report.metrics['accuracy']:.4f}, auc {report.auc:.4f})")
    print(f"wrote {out / 'roc_points.csv'}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    run = _load_run_config(args)
    out = _out_dir(args)
    X, y = read_feature_matrix(args.matrix)
    y = _require_labels(y)
    algo = _algo(args, run)
    stratified = _stratified(args, run)
    make_selector = lambda: InfoGainSelector(keep=_keep(args, run))  # noqa: E731

    if args.subset:
        # Evaluate one model restricted to the requested sensors instead of
        # sweeping: the table then holds a single row for that subset model.
        def sensor_of(col) -> str | None:
            return str(col).rsplit("@", 1)[1] if "@" in str(col) else None

        wanted = [s.strip() for s in args.subset.split(",") if s.strip()]
        available = []
        for col in X.columns:
            sid = sensor_of(col)
            if sid and sid not in available:
                available.append(sid)
        unknown = [s for s in wanted if s not in available]
        if unknown:
            raise ConfigError(
                f"unknown sensors: {', '.join(unknown)}; valid: {', '.join(available)}"
            )
        X = X.loc[:, [c for c in X.columns if sensor_of(c) in wanted]]
        report = ev.evaluate_run(
            X, y, lambda: build_classifier(run, algo), run.seed, stratified,
            make_selector(),
        )
        ev.write_ablation(
            report, [], out / "ablation.csv",
            baseline_label=f"sensors-{'+'.join(wanted)}",
        )
        print(
            f"wrote {out / 'ablation.csv'} (subset F "
            f"{report.metrics['f_measure_pos']:.4f}, {len(wanted)} sensors)"
        )
        return EXIT_OK

    baseline, rows = ev.ablation(
        X,
        y,
        lambda: build_classifier(run, algo),
        run.seed,
        stratified,
        make_selector=make_selector,
    )
    ev.write_ablation(baseline, rows, out / "ablation.csv")
    print(
        f"wrote {out / 'ablation.csv'} (baseline F {baseline.metrics['f_measure_pos']:.4f}, "
        f"{len(rows)} sensors swept)"
    )
    return EXIT_OK


def cmd_pipeline(args) -> int:
    run = _load_run_config(args)
    out = _out_dir(args)

    args.sensors = None
    cmd_generate(args)

    args.window = None
    args.include_gcs_pdf = False
    X, y = _extract_frames(args, run, out / "readings.csv", out / "labels.csv", out)
    write_feature_matrix(X, y, out / "features.csv")
    print(f"wrote {out / 'features.csv'} ({X.shape[0]} instances x {X.shape[1]} features)")

    y = _require_labels(y)
    algo = _algo(args, run)
    stratified = _stratified(args, run)
    seed = run.seed

    # One training pass: the saved model is exactly the evaluated model.
    train_idx, test_idx = ev.train_test_indices(y, seed, stratified)
    selector = InfoGainSelector(keep=_keep(args, run))
    selector.fit(X.iloc[train_idx], y[train_idx])
    model = build_classifier(run, algo)
    model.fit(selector.transform(X.iloc[train_idx]), y[train_idx])
    save_model(model, out / "model.json")
    write_ranking(selector.ranking_, out / "ranking.csv")
    print(f"wrote {out / 'model.json'} and {out / 'ranking.csv'}")

    X_test = selector.transform(X.iloc[test_idx])
    y_test = y[test_idx]
    positive = str(model.classes_[1])
    cm = ev.ConfusionMatrix.from_predictions(y_test, model.predict(X_test), positive)
    points, auc = ev.roc_curve(y_test, model.positive_score(X_test), positive)
    report = ev.EvalReport(
        confusion=cm,
        metrics=ev.metrics_from_confusion(cm),
        roc_points=points,
        auc=auc,
        n_train=len(train_idx),
        n_test=len(test_idx),
        selected_features=selector.selected_features_,
        ranking=selector.ranking_,
    )
    extra = {"algorithm": algo, "seed": seed, "stratified": stratified}
    ev.write_report(report, out / "report.csv", extra=extra)
    ev.write_roc_points(report.roc_points, out / "roc_points.csv")
    ev.roc_svg(report.roc_points, out / "roc.svg", title=f"ROC ({algo})")
    print(
        f"wrote {out / 'report.csv'}, {out / 'roc_points.csv'}, {out / 'roc.svg'} "
        f"(accuracy {report.metrics['accuracy']:.4f}, auc {report.auc:.4f})"
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"nearsense: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"nearsense: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"nearsense: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"nearsense: training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except NearsenseError as exc:
        print(f"nearsense: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
