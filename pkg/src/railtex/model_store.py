"""Versioned model persistence.

A model file is a single JSON document holding the preprocessing and
feature settings, the fitted standardizer, the PCA basis, and one
classifier. Floats serialize through Python's shortest round-trip repr,
so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import ForestModel, KnnModel, Standardizer, SvmModel, TreeNode
from .config import RunConfig, config_from_dict, config_to_dict
from .errors import ModelFormatError
from .pca import PcaModel

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelBundle:
    """Everything needed to classify a raw image."""

    config: RunConfig
    class_names: tuple[str, ...]
    standardizer: Standardizer
    pca: PcaModel
    classifier_kind: str  # knn | rf | svm
    classifier: object


def save_model(bundle: ModelBundle, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "config": config_to_dict(bundle.config),
        "class_names": list(bundle.class_names),
        "standardizer": {
            "means": bundle.standardizer.means.tolist(),
            "stds": bundle.standardizer.stds.tolist(),
        },
        "pca": {
            "mean": bundle.pca.mean.tolist(),
            "components": bundle.pca.components.tolist(),
            "eigenvalues": bundle.pca.eigenvalues.tolist(),
            "explained_ratio": bundle.pca.explained_ratio.tolist(),
        },
        "classifier_kind": bundle.classifier_kind,
        "classifier": _classifier_to_dict(bundle.classifier_kind, bundle.classifier),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_model(path) -> ModelBundle:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"model file is not valid JSON: {path} ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {doc.get('format_version')!r} in {path}; expected {FORMAT_VERSION}"
        )
    try:
        config = config_from_dict(doc["config"])
        class_names = tuple(doc["class_names"])
        std = Standardizer(
            means=np.array(doc["standardizer"]["means"], dtype=np.float64),
            stds=np.array(doc["standardizer"]["stds"], dtype=np.float64),
        )
        pca = PcaModel(
            mean=np.array(doc["pca"]["mean"], dtype=np.float64),
            components=np.array(doc["pca"]["components"], dtype=np.float64),
            eigenvalues=np.array(doc["pca"]["eigenvalues"], dtype=np.float64),
            explained_ratio=np.array(doc["pca"]["explained_ratio"], dtype=np.float64),
        )
        kind = doc["classifier_kind"]
        clf = _classifier_from_dict(kind, doc["classifier"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"model file is malformed: {path} ({exc})") from exc
    return ModelBundle(
        config=config, class_names=class_names, standardizer=std,
        pca=pca, classifier_kind=kind, classifier=clf,
    )


def _classifier_to_dict(kind: str, clf) -> dict:
    if kind == "knn":
        return {"X": clf.X.tolist(), "y": clf.y.tolist(), "k": clf.k, "n_classes": clf.n_classes}
    if kind == "svm":
        return {
            "weights": clf.weights.tolist(), "biases": clf.biases.tolist(),
            "lambda": clf.lambda_, "epochs": clf.epochs, "seed": clf.seed,
        }
    if kind == "rf":
        return {
            "trees": [_tree_to_dict(t) for t in clf.trees],
            "n_trees": clf.n_trees, "max_depth": clf.max_depth, "min_leaf": clf.min_leaf,
            "mtry": clf.mtry, "seed": clf.seed, "n_classes": clf.n_classes,
        }
    raise ModelFormatError(f"unknown classifier kind {kind!r}")


def _classifier_from_dict(kind: str, data: dict):
    if kind == "knn":
        return KnnModel(
            X=np.array(data["X"], dtype=np.float64),
            y=np.array(data["y"], dtype=np.int64),
            k=int(data["k"]),
            n_classes=int(data["n_classes"]),
        )
    if kind == "svm":
        return SvmModel(
            weights=np.array(data["weights"], dtype=np.float64),
            biases=np.array(data["biases"], dtype=np.float64),
            lambda_=float(data["lambda"]),
            epochs=int(data["epochs"]),
            seed=int(data["seed"]),
        )
    if kind == "rf":
        return ForestModel(
            trees=tuple(_tree_from_dict(t) for t in data["trees"]),
            n_trees=int(data["n_trees"]),
            max_depth=int(data["max_depth"]),
            min_leaf=int(data["min_leaf"]),
            mtry=int(data["mtry"]),
            seed=int(data["seed"]),
            n_classes=int(data["n_classes"]),
        )
    raise ModelFormatError(f"unknown classifier kind {kind!r}")


def _tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": node.counts.tolist()}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(data: dict) -> TreeNode:
    if "counts" in data:
        return TreeNode(counts=np.array(data["counts"], dtype=np.int64))
    return TreeNode(
        feature=int(data["feature"]),
        threshold=float(data["threshold"]),
        left=_tree_from_dict(data["left"]),
        right=_tree_from_dict(data["right"]),
    )
