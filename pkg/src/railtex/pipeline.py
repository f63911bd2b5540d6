"""End-to-end flow: ingest, split, preprocess, features, fit, evaluate.

Feature extraction is pure per image, so it can optionally fan out over a
process pool; parallel and sequential runs produce identical values. All
fitting happens on the training split only. Reports carry no timestamps,
so a (dataset, config, seed) triple always produces byte-identical
artifacts.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .classify import (
    LabeledSet,
    apply_standardizer,
    default_mtry,
    fit_knn,
    fit_rf,
    fit_standardizer,
    fit_svm,
    knn_vote_counts,
    predict_knn,
    predict_rf,
    predict_svm,
    rf_vote_counts,
    svm_decision_scores,
)
from .config import RunConfig
from .dataset import DatasetIndex, ingest_dataset, stratified_split
from .errors import DatasetError, ImageIOError, RailTexError, StageError
from .image_io import load_image, to_grayscale
from .metrics import EvalReport, confusion_matrix, macro_report, render_comparison_text, render_report_text, report_to_json
from .model_store import ModelBundle, save_model
from .pca import fit_pca, transform
from .preprocess import preprocess_pipeline
from .texture import extract_features, feature_schema

CLASSIFIER_KINDS = ("knn", "rf", "svm")


def preprocess_file(path, cfg: RunConfig) -> np.ndarray:
    """Load one image and run the full preprocessing stack."""
    try:
        rgb = load_image(path)
    except ImageIOError as exc:
        raise StageError("load", exc, context=str(path)) from exc
    gray = to_grayscale(rgb)
    try:
        return preprocess_pipeline(
            gray,
            cfg.filter_config(),
            mask_mode=cfg.mask_mode,
            mask_rect=cfg.mask_rect,
            working_size=cfg.working_size(),
        )
    except StageError as exc:
        raise StageError(exc.stage, exc.cause, context=str(path)) from exc


def _extract_one(root: str, cfg: RunConfig, rel: str) -> np.ndarray:
    processed = preprocess_file(Path(root) / rel, cfg)
    return extract_features(processed, cfg.feature_config(), image_id=rel).values


def extract_dataset_features(index: DatasetIndex, cfg: RunConfig, rows: list[int] | None = None) -> np.ndarray:
    """Feature matrix for the selected index rows (all rows by default).

    Failures are collected across the whole pass and reported together.
    """
    if rows is None:
        rows = list(range(len(index.entries)))
    rels = [index.entries[i][0] for i in rows]
    root = str(index.root)
    results: list[np.ndarray | None] = [None] * len(rels)
    failures: list[str] = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_extract_one, root, cfg, rel) for rel in rels]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except RailTexError as exc:
                    failures.append(f"{rels[i]}: {exc}")
    else:
        for i, rel in enumerate(rels):
            try:
                results[i] = _extract_one(root, cfg, rel)
            except RailTexError as exc:
                failures.append(f"{rel}: {exc}")
    if failures:
        raise DatasetError("feature extraction failed for:\n" + "\n".join(failures))
    return np.vstack(results)


def write_features_csv(path, index: DatasetIndex, rows: list[int], features: np.ndarray, schema) -> None:
    lines = ["image_id,label," + ",".join(schema)]
    for r, vec in zip(rows, features):
        rel, ci = index.entries[r]
        cells = ",".join(f"{v:.9g}" for v in vec)
        lines.append(f"{rel},{index.class_names[ci]},{cells}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_class_summary_csv(path, index: DatasetIndex, rows: list[int], features: np.ndarray, schema) -> None:
    """Mean and std of every feature per class (population std)."""
    labels = np.array([index.entries[r][1] for r in rows])
    lines = ["class,feature,mean,std"]
    for ci, name in enumerate(index.class_names):
        sub = features[labels == ci]
        means = sub.mean(axis=0)
        stds = sub.std(axis=0)
        for feat, m, s in zip(schema, means, stds):
            lines.append(f"{name},{feat},{m:.9g},{s:.9g}")
    Path(path).write_text("\n".join(lines) + "\n")


def _fit_classifier(kind: str, train: LabeledSet, cfg: RunConfig):
    if kind == "knn":
        return fit_knn(train, k=cfg.knn_k)
    if kind == "rf":
        return fit_rf(
            train, n_trees=cfg.rf_trees, max_depth=cfg.rf_max_depth,
            min_leaf=cfg.rf_min_leaf, seed=cfg.seed,
        )
    if kind == "svm":
        return fit_svm(train, lambda_=cfg.svm_lambda, epochs=cfg.svm_epochs, seed=cfg.seed)
    raise RailTexError(f"unknown classifier kind {kind!r}")


def _predict(kind: str, model, x: np.ndarray) -> int:
    if kind == "knn":
        return predict_knn(model, x)
    if kind == "rf":
        return predict_rf(model, x)
    return predict_svm(model, x)


def classifier_scores(kind: str, model, x: np.ndarray) -> np.ndarray:
    """Per-class score vector: vote fractions for knn/rf, margins for svm."""
    if kind == "knn":
        return knn_vote_counts(model, x) / model.k
    if kind == "rf":
        return rf_vote_counts(model, x) / model.n_trees
    return svm_decision_scores(model, x)


def _hyperparameters(kind: str, cfg: RunConfig, pca_k: int) -> dict:
    common = {
        "pca_k": pca_k,
        "glcm_levels": cfg.glcm_levels,
        "angle_mode": cfg.angle_mode,
        "split_ratio": cfg.split_ratio,
    }
    if kind == "knn":
        return {**common, "k": cfg.knn_k}
    if kind == "rf":
        return {
            **common, "n_trees": cfg.rf_trees, "max_depth": cfg.rf_max_depth,
            "min_leaf": cfg.rf_min_leaf, "mtry": default_mtry(pca_k),
        }
    return {**common, "lambda": cfg.svm_lambda, "epochs": cfg.svm_epochs}


class FittedPipeline:
    """Standardizer + PCA + classifiers fitted on one training split."""

    def __init__(self, cfg: RunConfig, index: DatasetIndex, train_rows, standardizer, pca, models: dict):
        self.cfg = cfg
        self.index = index
        self.train_rows = train_rows
        self.standardizer = standardizer
        self.pca = pca
        self.models = models

    def reduce(self, features: np.ndarray) -> np.ndarray:
        return transform(self.pca, apply_standardizer(self.standardizer, features))

    def bundle(self, kind: str) -> ModelBundle:
        return ModelBundle(
            config=self.cfg,
            class_names=self.index.class_names,
            standardizer=self.standardizer,
            pca=self.pca,
            classifier_kind=kind,
            classifier=self.models[kind],
        )


def fit_pipeline(cfg: RunConfig, index: DatasetIndex, train_rows: list[int],
                 train_features: np.ndarray, kinds) -> FittedPipeline:
    y_train = np.array([index.entries[r][1] for r in train_rows], dtype=np.int64)
    standardizer = fit_standardizer(train_features)
    standardized = apply_standardizer(standardizer, train_features)
    pca = fit_pca(standardized, cfg.pca_k)
    reduced = transform(pca, standardized)
    train_set = LabeledSet(X=reduced, y=y_train, class_names=index.class_names)
    models = {kind: _fit_classifier(kind, train_set, cfg) for kind in kinds}
    return FittedPipeline(cfg, index, train_rows, standardizer, pca, models)


def evaluate_split(fitted: FittedPipeline, kind: str, test_rows: list[int], test_features: np.ndarray) -> EvalReport:
    reduced = fitted.reduce(test_features)
    y_true = [fitted.index.entries[r][1] for r in test_rows]
    y_pred = [_predict(kind, fitted.models[kind], x) for x in reduced]
    cm = confusion_matrix(y_true, y_pred, fitted.index.class_names)
    pca_k = fitted.pca.components.shape[0]
    return macro_report(cm, classifier=kind, hyperparameters=_hyperparameters(kind, fitted.cfg, pca_k), seed=fitted.cfg.seed)


def run_experiment(cfg: RunConfig, kinds: list[str] | None = None) -> dict[str, EvalReport]:
    """The full flow; writes features, summaries, reports, and model files.

    Returns the evaluation report per classifier kind.
    """
    cfg.validate()
    if not cfg.dataset_root:
        raise DatasetError("config has no dataset_root")
    if kinds is None:
        kinds = list(CLASSIFIER_KINDS) if cfg.classifier == "all" else [cfg.classifier]

    index = ingest_dataset(cfg.dataset_root)
    train_rows, test_rows = stratified_split(index, cfg.split_ratio, cfg.seed)
    all_rows = list(range(len(index.entries)))
    features = extract_dataset_features(index, cfg, all_rows)
    schema = feature_schema(cfg.feature_config())

    report_dir = Path(cfg.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    write_features_csv(report_dir / "features.csv", index, all_rows, features, schema)
    write_class_summary_csv(report_dir / "feature_summary_by_class.csv", index, all_rows, features, schema)

    fitted = fit_pipeline(cfg, index, train_rows, features[train_rows], kinds)
    reports: dict[str, EvalReport] = {}
    for kind in kinds:
        report = evaluate_split(fitted, kind, test_rows, features[test_rows])
        reports[kind] = report
        (report_dir / f"report_{kind}.json").write_text(report_to_json(report))
        (report_dir / f"report_{kind}.txt").write_text(render_report_text(report))
        save_model(fitted.bundle(kind), _model_path(cfg.model_file, kind, many=len(kinds) > 1))
    if len(kinds) > 1:
        ordered = [reports[k] for k in kinds]
        (report_dir / "comparison.txt").write_text(render_comparison_text(ordered))
    return reports


def train_model(cfg: RunConfig, kinds: list[str] | None = None) -> list[Path]:
    """Fit on the training split only and save the model file(s).

    Test images are never read, so their content cannot influence the
    saved model.
    """
    cfg.validate()
    if not cfg.dataset_root:
        raise DatasetError("config has no dataset_root")
    if kinds is None:
        kinds = list(CLASSIFIER_KINDS) if cfg.classifier == "all" else [cfg.classifier]
    index = ingest_dataset(cfg.dataset_root)
    train_rows, _ = stratified_split(index, cfg.split_ratio, cfg.seed)
    train_features = extract_dataset_features(index, cfg, train_rows)
    fitted = fit_pipeline(cfg, index, train_rows, train_features, kinds)
    paths = []
    for kind in kinds:
        path = _model_path(cfg.model_file, kind, many=len(kinds) > 1)
        save_model(fitted.bundle(kind), path)
        paths.append(path)
    return paths


def evaluate_model(bundle: ModelBundle, cfg: RunConfig) -> EvalReport:
    """Evaluate a trained bundle on the test split of cfg's dataset.

    Preprocessing and feature settings come from the bundle so the
    features match what the classifier was trained on; dataset location,
    split ratio, and seed come from cfg.
    """
    cfg.validate()
    if not cfg.dataset_root:
        raise DatasetError("config has no dataset_root")
    index = ingest_dataset(cfg.dataset_root)
    if index.class_names != bundle.class_names:
        raise DatasetError(
            f"dataset classes {index.class_names} do not match model classes {bundle.class_names}"
        )
    _, test_rows = stratified_split(index, cfg.split_ratio, cfg.seed)
    feat_cfg = bundle.config
    test_features = extract_dataset_features(index, feat_cfg, test_rows)
    reduced = transform(bundle.pca, apply_standardizer(bundle.standardizer, test_features))
    y_true = [index.entries[r][1] for r in test_rows]
    y_pred = [_predict(bundle.classifier_kind, bundle.classifier, x) for x in reduced]
    cm = confusion_matrix(y_true, y_pred, index.class_names)
    pca_k = bundle.pca.components.shape[0]
    return macro_report(
        cm, classifier=bundle.classifier_kind,
        hyperparameters=_hyperparameters(bundle.classifier_kind, bundle.config, pca_k),
        seed=cfg.seed,
    )


def predict_image(bundle: ModelBundle, image_path) -> tuple[str, dict[str, float]]:
    """Classify one raw image with a trained bundle."""
    processed = preprocess_file(image_path, bundle.config)
    vec = extract_features(processed, bundle.config.feature_config()).values
    reduced = transform(bundle.pca, apply_standardizer(bundle.standardizer, vec))
    label = _predict(bundle.classifier_kind, bundle.classifier, reduced)
    scores = classifier_scores(bundle.classifier_kind, bundle.classifier, reduced)
    return bundle.class_names[label], {name: float(s) for name, s in zip(bundle.class_names, scores)}


def _model_path(base: str, kind: str, many: bool) -> Path:
    path = Path(base)
    if not many:
        return path
    return path.with_name(f"{path.stem}_{kind}{path.suffix or '.json'}")
