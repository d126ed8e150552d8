import numpy as np
import pytest

from ballotbeat.errors import DatasetError
from ballotbeat.metrics import evaluate


def brute_force_report(predictions, gold, labels):
    """Independent recount used as the oracle for evaluate()."""
    scores = {}
    for label in labels:
        tp = sum(1 for p, g in zip(predictions, gold) if p == label and g == label)
        fp = sum(1 for p, g in zip(predictions, gold) if p == label and g != label)
        fn = sum(1 for p, g in zip(predictions, gold) if p != label and g == label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores[label] = (precision, recall, f1, tp + fn)
    total = sum(s[3] for s in scores.values())
    weighted = sum(s[2] * s[3] for s in scores.values()) / total if total else 0.0
    return scores, weighted


def test_all_correct_is_perfect():
    report = evaluate(["a", "b", "a"], ["a", "b", "a"])
    for m in report.per_class.values():
        assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)
    assert report.weighted_f1 == 1.0
    assert report.macro_f1 == 1.0


def test_hand_computed_binary_example():
    # gold [1,1,0,0], pred [1,0,0,0]: class-1 P=1, R=0.5, F1=2/3
    report = evaluate([1, 0, 0, 0], [1, 1, 0, 0], labels=(0, 1))
    m = report.per_class[1]
    assert m.precision == 1.0
    assert m.recall == 0.5
    assert m.f1 == pytest.approx(2 / 3)
    assert m.support == 2
    np.testing.assert_array_equal(report.confusion, [[2, 0], [1, 1]])


def test_degenerate_class_excluded_from_weighted():
    # class 'c' never appears: F1 0, support 0, no weight contribution
    report = evaluate(["a", "b"], ["a", "b"], labels=("a", "b", "c"))
    assert report.per_class["c"].f1 == 0.0
    assert report.per_class["c"].support == 0
    assert report.weighted_f1 == 1.0
    assert report.macro_f1 == pytest.approx(2 / 3)


def test_confusion_rows_sum_to_supports():
    rng = np.random.default_rng(0)
    gold = list(rng.integers(0, 4, 60))
    pred = list(rng.integers(0, 4, 60))
    report = evaluate(pred, gold, labels=range(4))
    for i, label in enumerate(report.labels):
        assert report.confusion[i].sum() == report.per_class[label].support


def test_matches_brute_force_recount_on_22_classes():
    rng = np.random.default_rng(7)
    labels = tuple(range(22))
    gold = list(rng.integers(0, 22, 1000))
    pred = list(np.where(rng.random(1000) < 0.6, gold, rng.integers(0, 22, 1000)))
    report = evaluate(pred, gold, labels=labels)
    brute, weighted = brute_force_report(pred, gold, labels)
    for label in labels:
        m = report.per_class[label]
        assert abs(m.precision - brute[label][0]) <= 1e-12
        assert abs(m.recall - brute[label][1]) <= 1e-12
        assert abs(m.f1 - brute[label][2]) <= 1e-12
        assert m.support == brute[label][3]
    assert abs(report.weighted_f1 - weighted) <= 1e-12


def test_length_mismatch_rejected():
    with pytest.raises(DatasetError):
        evaluate(["a"], ["a", "b"])


def test_unknown_label_rejected():
    with pytest.raises(DatasetError):
        evaluate(["a"], ["z"], labels=("a", "b"))


def test_metrics_stay_in_unit_interval():
    rng = np.random.default_rng(3)
    gold = list(rng.integers(0, 5, 200))
    pred = list(rng.integers(0, 5, 200))
    report = evaluate(pred, gold, labels=range(5))
    for m in report.per_class.values():
        assert 0.0 <= m.precision <= 1.0
        assert 0.0 <= m.recall <= 1.0
        assert 0.0 <= m.f1 <= 1.0
    assert 0.0 <= report.weighted_f1 <= 1.0


def test_report_serializes():
    report = evaluate(["a", "b"], ["a", "a"])
    payload = report.to_dict()
    assert payload["per_class"]["a"]["recall"] == 0.5
    assert payload["confusion"] == [[1, 1], [0, 0]]
