"""Confusion matrices and the six-metric evaluation report.

Per class (one-vs-rest): accuracy, sensitivity, specificity, precision,
f_mean, g_mean. Reports aggregate by unweighted (macro) averaging over
classes. Any 0/0 ratio is reported as 0 and the metric name is flagged as
degenerate instead of raising, so batch evaluation stays total.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

METRIC_ORDER = ("accuracy", "sensitivity", "specificity", "precision", "f_mean", "g_mean")


@dataclass(frozen=True)
class ConfusionMatrix:
    """C x C counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class BinaryCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSuite:
    accuracy: float
    sensitivity: float
    specificity: float
    precision: float
    f_mean: float
    g_mean: float
    degenerate: tuple[str, ...] = ()

    def values(self) -> tuple[float, ...]:
        return (self.accuracy, self.sensitivity, self.specificity, self.precision, self.f_mean, self.g_mean)


@dataclass(frozen=True)
class EvalReport:
    """Per-class and macro metrics for one classifier run."""

    classifier: str
    hyperparameters: dict
    seed: int
    class_names: tuple[str, ...]
    confusion: ConfusionMatrix
    per_class: tuple[MetricSuite, ...]
    macro: MetricSuite


def confusion_matrix(y_true, y_pred, class_names) -> ConfusionMatrix:
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise InvalidParameterError(f"label vectors must be equal-length 1-D, got {yt.shape} and {yp.shape}")
    C = len(class_names)
    if yt.size and (min(yt.min(), yp.min()) < 0 or max(yt.max(), yp.max()) >= C):
        raise InvalidParameterError(f"labels out of range for {C} classes")
    counts = np.zeros((C, C), dtype=np.int64)
    np.add.at(counts, (yt, yp), 1)
    return ConfusionMatrix(counts=counts, class_names=tuple(class_names))


def binary_counts(cm: ConfusionMatrix, c: int) -> BinaryCounts:
    """One-vs-rest reduction of the confusion matrix for class c."""
    C = len(cm.class_names)
    if not 0 <= c < C:
        raise InvalidParameterError(f"class {c} out of range for {C} classes")
    m = cm.counts
    tp = int(m[c, c])
    fn = int(m[c].sum() - tp)
    fp = int(m[:, c].sum() - tp)
    tn = cm.total - tp - fn - fp
    return BinaryCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, den: int, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def metric_suite(b: BinaryCounts) -> MetricSuite:
    """The six metrics for one one-vs-rest count tuple."""
    if b.total == 0:
        raise InvalidParameterError("empty counts: no samples evaluated")
    flags: list[str] = []
    accuracy = _ratio(b.tp + b.tn, (b.tp + b.fp) + (b.tn + b.fn), "accuracy", flags)
    sensitivity = _ratio(b.tp, b.tp + b.fn, "sensitivity", flags)
    specificity = _ratio(b.tn, b.fp + b.tn, "specificity", flags)
    precision = _ratio(b.tp, b.tp + b.fp, "precision", flags)
    f_mean = _ratio(2 * b.tp, 2 * b.tp + b.fp + b.fn, "f_mean", flags)
    tpr = sensitivity
    tnr = specificity
    if (b.tp + b.fn) == 0 or (b.tn + b.fp) == 0:
        if "g_mean" not in flags:
            flags.append("g_mean")
        g_mean = 0.0
    else:
        g_mean = math.sqrt(tpr * tnr)
    return MetricSuite(accuracy, sensitivity, specificity, precision, f_mean, g_mean, tuple(flags))


def macro_report(
    cm: ConfusionMatrix,
    classifier: str = "",
    hyperparameters: dict | None = None,
    seed: int = 0,
) -> EvalReport:
    """Per-class suites plus their unweighted mean per metric."""
    if cm.total == 0:
        raise InvalidParameterError("empty confusion matrix")
    suites = tuple(metric_suite(binary_counts(cm, c)) for c in range(len(cm.class_names)))
    table = np.array([s.values() for s in suites])
    macro_vals = table.mean(axis=0)
    macro_flags = tuple(sorted({name for s in suites for name in s.degenerate}))
    macro = MetricSuite(*macro_vals, degenerate=macro_flags)
    return EvalReport(
        classifier=classifier,
        hyperparameters=dict(hyperparameters or {}),
        seed=seed,
        class_names=cm.class_names,
        confusion=cm,
        per_class=suites,
        macro=macro,
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "classifier": report.classifier,
        "hyperparameters": report.hyperparameters,
        "seed": report.seed,
        "class_names": list(report.class_names),
        "averaging": "macro",
        "confusion_matrix": report.confusion.counts.tolist(),
        "per_class": {
            name: {
                "metrics": {m: v for m, v in zip(METRIC_ORDER, suite.values())},
                "degenerate": list(suite.degenerate),
            }
            for name, suite in zip(report.class_names, report.per_class)
        },
        "macro": {
            "metrics": {m: v for m, v in zip(METRIC_ORDER, report.macro.values())},
            "degenerate": list(report.macro.degenerate),
        },
    }


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def render_report_text(report: EvalReport) -> str:
    """Aligned per-class + macro table, metrics in the fixed row order."""
    cols = list(report.class_names) + ["macro"]
    lines = [f"classifier: {report.classifier}  (seed {report.seed}, macro averaging)"]
    lines.append(_format_row("metric", cols))
    suites = list(report.per_class) + [report.macro]
    for mi, metric in enumerate(METRIC_ORDER):
        lines.append(_format_row(metric, [f"{s.values()[mi]:.5f}" for s in suites]))
    flagged = [f"{name}:{','.join(s.degenerate)}" for name, s in zip(cols, suites) if s.degenerate]
    if flagged:
        lines.append("degenerate: " + "  ".join(flagged))
    return "\n".join(lines) + "\n"


def render_comparison_text(reports: list[EvalReport]) -> str:
    """Macro metrics side by side, one column per classifier."""
    names = [r.classifier for r in reports]
    lines = [_format_row("metric", names)]
    for mi, metric in enumerate(METRIC_ORDER):
        lines.append(_format_row(metric, [f"{r.macro.values()[mi]:.5f}" for r in reports]))
    return "\n".join(lines) + "\n"


def _format_row(label: str, cells) -> str:
    parts = [f"{label:<12}"] + [f"{str(c):>12}" for c in cells]
    return "  ".join(parts)
