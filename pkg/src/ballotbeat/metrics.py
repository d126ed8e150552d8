"""Precision/recall/F1 evaluation harness.

Per-class scores come from the confusion matrix (rows = gold, columns =
predicted). F1 is defined as 0 whenever precision + recall is 0; the
weighted F-score is the support-weighted mean of per-class F1, with
zero-support classes excluded from the weighting.
"""

from dataclasses import dataclass

import numpy as np

from ballotbeat.errors import DatasetError


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    labels: tuple
    per_class: dict
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_f1: float
    confusion: np.ndarray  # confusion[i, j] = gold label i predicted as j

    def to_dict(self) -> dict:
        return {
            "labels": [str(label) for label in self.labels],
            "per_class": {
                str(label): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                } for label, m in self.per_class.items()
            },
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "confusion": self.confusion.tolist(),
        }


def evaluate(predictions, gold, labels=None) -> EvalReport:
    """Score predictions against gold labels.

    ``labels`` fixes the class order (and may include classes absent from
    the data); by default it is the sorted union of observed labels. Macro
    averages run over that whole label set.
    """
    predictions = list(predictions)
    gold = list(gold)
    if len(predictions) != len(gold):
        raise DatasetError(
            f"{len(predictions)} predictions against {len(gold)} gold labels")
    if labels is None:
        labels = sorted(set(gold) | set(predictions))
    labels = tuple(labels)
    index = {label: i for i, label in enumerate(labels)}
    missing = (set(gold) | set(predictions)) - set(index)
    if missing:
        raise DatasetError(f"labels {sorted(map(str, missing))} missing from label space")

    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, predictions):
        confusion[index[g], index[p]] += 1

    per_class = {}
    for label, i in index.items():
        tp = int(confusion[i, i])
        support = int(confusion[i, :].sum())
        predicted = int(confusion[:, i].sum())
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = ClassMetrics(precision, recall, f1, support)

    metrics = list(per_class.values())
    supports = np.array([m.support for m in metrics], dtype=np.float64)
    f1s = np.array([m.f1 for m in metrics])
    weighted = float((supports * f1s).sum() / supports.sum()) if supports.sum() else 0.0
    return EvalReport(
        labels=labels,
        per_class=per_class,
        macro_precision=float(np.mean([m.precision for m in metrics])),
        macro_recall=float(np.mean([m.recall for m in metrics])),
        macro_f1=float(np.mean(f1s)),
        weighted_f1=weighted,
        confusion=confusion,
    )
