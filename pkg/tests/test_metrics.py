import json
import math

import numpy as np
import pytest

from railtex import (
    BinaryCounts,
    binary_counts,
    confusion_matrix,
    macro_report,
    metric_suite,
)
from railtex.errors import InvalidParameterError
from railtex.metrics import (
    METRIC_ORDER,
    render_comparison_text,
    render_report_text,
    report_to_json,
)


def suite_oracle(tp, fp, tn, fn):
    """Direct evaluation of the six ratios; 0/0 -> 0."""

    def ratio(a, b):
        return 0.0 if b == 0 else a / b

    tpr = ratio(tp, tp + fn)
    tnr = ratio(tn, tn + fp)
    return (
        ratio(tp + tn, tp + fp + tn + fn),
        tpr,
        tnr,
        ratio(tp, tp + fp),
        ratio(2 * tp, 2 * tp + fp + fn),
        math.sqrt(tpr * tnr),
    )


class TestConfusionMatrix:
    def test_perfect_is_diagonal(self):
        cm = confusion_matrix([0, 1, 2, 2], [0, 1, 2, 2], ("a", "b", "c"))
        assert (cm.counts == np.diag([1, 1, 2])).all()

    def test_tally(self):
        cm = confusion_matrix([0, 1, 2], [0, 2, 2], ("a", "b", "c"))
        assert cm.counts[1, 2] == 1
        assert cm.counts.diagonal().tolist() == [1, 0, 1]

    def test_empty_inputs(self):
        cm = confusion_matrix([], [], ("a", "b"))
        assert cm.counts.sum() == 0

    def test_length_mismatch(self):
        with pytest.raises(InvalidParameterError):
            confusion_matrix([0, 1], [0], ("a", "b"))

    def test_label_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            confusion_matrix([0, 5], [0, 1], ("a", "b"))


class TestBinaryCounts:
    def test_diagonal_reduction(self):
        cm = confusion_matrix([0] * 5 + [1] * 3 + [2] * 2, [0] * 5 + [1] * 3 + [2] * 2, ("a", "b", "c"))
        b = binary_counts(cm, 0)
        assert (b.tp, b.fn, b.fp, b.tn) == (5, 0, 0, 5)

    def test_off_diagonal_becomes_fp(self):
        cm = confusion_matrix([1] * 4, [0] * 4, ("a", "b"))
        b = binary_counts(cm, 0)
        assert b.fp == 4 and b.tp == 0

    def test_counts_partition_total(self):
        y_true = [0, 0, 1, 1, 2, 2, 2]
        y_pred = [0, 1, 1, 2, 2, 0, 2]
        cm = confusion_matrix(y_true, y_pred, ("a", "b", "c"))
        for c in range(3):
            b = binary_counts(cm, c)
            assert b.total == len(y_true)

    def test_class_out_of_range(self):
        cm = confusion_matrix([0], [0], ("a",))
        with pytest.raises(InvalidParameterError):
            binary_counts(cm, 3)


class TestMetricSuite:
    def test_hand_worked_example(self):
        # frozen from the direct-ratio oracle: tp=5, fp=1, tn=90, fn=4
        s = metric_suite(BinaryCounts(tp=5, fp=1, tn=90, fn=4))
        assert abs(s.accuracy - 0.95) < 5e-7
        assert abs(s.sensitivity - 0.555556) < 5e-7
        assert abs(s.specificity - 0.989011) < 5e-7
        assert abs(s.precision - 0.833333) < 5e-7
        assert abs(s.f_mean - 0.666667) < 5e-7
        assert abs(s.g_mean - 0.741249) < 5e-7
        assert s.values() == suite_oracle(5, 1, 90, 4)

    def test_perfect_classifier(self):
        s = metric_suite(BinaryCounts(tp=10, fp=0, tn=20, fn=0))
        assert all(v == 1.0 for v in s.values())
        assert s.degenerate == ()

    def test_zero_positive_support_flagged(self):
        s = metric_suite(BinaryCounts(tp=0, fp=0, tn=9, fn=0))
        assert s.sensitivity == 0.0
        assert "sensitivity" in s.degenerate and "precision" in s.degenerate

    def test_empty_counts_rejected(self):
        with pytest.raises(InvalidParameterError):
            metric_suite(BinaryCounts(0, 0, 0, 0))

    def test_gmean_identity_random_tuples(self, rng):
        for _ in range(500):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 50, size=4))
            if tp + fp + tn + fn == 0:
                continue
            s = metric_suite(BinaryCounts(tp, fp, tn, fn))
            if (tp + fn) > 0 and (tn + fp) > 0:
                assert abs(s.g_mean**2 - s.sensitivity * s.specificity) < 1e-12

    def test_fmean_is_harmonic_mean(self, rng):
        for _ in range(300):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 30, size=4))
            s = metric_suite(BinaryCounts(tp, fp, tn, fn)) if tp + fp + tn + fn else None
            if s is None or tp == 0:
                continue
            harmonic = 2 * s.precision * s.sensitivity / (s.precision + s.sensitivity)
            assert abs(s.f_mean - harmonic) < 1e-12

    def test_all_metrics_in_unit_interval(self, rng):
        for _ in range(200):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 40, size=4))
            if tp + fp + tn + fn == 0:
                continue
            s = metric_suite(BinaryCounts(tp, fp, tn, fn))
            assert all(0.0 <= v <= 1.0 for v in s.values())


class TestMacroReport:
    def test_diagonal_gives_all_ones(self):
        cm = confusion_matrix([0, 1, 2], [0, 1, 2], ("a", "b", "c"))
        report = macro_report(cm)
        assert all(v == 1.0 for v in report.macro.values())

    def test_two_class_composition(self):
        # class 0 one-vs-rest reduces to the hand example above
        cm = confusion_matrix(
            [0] * 9 + [1] * 91,
            [0] * 5 + [1] * 4 + [0] * 1 + [1] * 90,
            ("pos", "rest"),
        )
        b = binary_counts(cm, 0)
        assert (b.tp, b.fp, b.tn, b.fn) == (5, 1, 90, 4)
        report = macro_report(cm)
        expected = np.mean(
            [suite_oracle(5, 1, 90, 4), suite_oracle(90, 4, 5, 1)], axis=0
        )
        assert np.allclose(report.macro.values(), expected, atol=1e-12)

    def test_single_class_degenerate_specificity(self):
        cm = confusion_matrix([0, 0, 0], [0, 0, 0], ("only",))
        report = macro_report(cm)
        assert "specificity" in report.per_class[0].degenerate

    def test_macro_invariant_under_class_permutation(self, rng):
        y_true = rng.integers(0, 3, size=60)
        y_pred = rng.integers(0, 3, size=60)
        cm = confusion_matrix(y_true, y_pred, ("a", "b", "c"))
        perm = [2, 0, 1]
        relabel = np.array(perm)
        cm_p = confusion_matrix(relabel[y_true], relabel[y_pred], ("c", "a", "b"))
        r1, r2 = macro_report(cm), macro_report(cm_p)
        assert np.allclose(r1.macro.values(), r2.macro.values(), atol=1e-12)

    def test_empty_cm_rejected(self):
        cm = confusion_matrix([], [], ("a", "b"))
        with pytest.raises(InvalidParameterError):
            macro_report(cm)


class TestRendering:
    def _report(self):
        cm = confusion_matrix([0, 0, 1, 1, 2, 2], [0, 0, 1, 2, 2, 2], ("a", "b", "c"))
        return macro_report(cm, classifier="rf", hyperparameters={"n_trees": 10}, seed=7)

    def test_text_table_row_order(self):
        text = render_report_text(self._report())
        rows = [line.split()[0] for line in text.splitlines()[2:8]]
        assert rows == list(METRIC_ORDER)
        assert "0." in text  # 5-decimal values present

    def test_comparison_row_order(self):
        text = render_comparison_text([self._report(), self._report()])
        rows = [line.split()[0] for line in text.splitlines()[1:7]]
        assert rows == list(METRIC_ORDER)

    def test_json_round_trip_and_fields(self):
        doc = json.loads(report_to_json(self._report()))
        assert doc["classifier"] == "rf"
        assert doc["seed"] == 7
        assert doc["hyperparameters"] == {"n_trees": 10}
        assert set(doc["per_class"]) == {"a", "b", "c"}
        assert list(doc["macro"]["metrics"]) and doc["averaging"] == "macro"

    def test_json_deterministic(self):
        assert report_to_json(self._report()) == report_to_json(self._report())
