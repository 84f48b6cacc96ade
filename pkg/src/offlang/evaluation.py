"""Accuracy, per-class precision/recall/F1, macro-F1, and confusion matrices.

Zero denominators follow the 0/0 -> 0 convention: a class that is never
predicted (or never occurs) contributes an F1 of 0 to the macro mean. That
is what makes constant-label baselines comparable across class imbalance.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import LABELS_A, LABELS_B


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[g][p] = number of records with gold label g predicted as p."""

    labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "counts", counts)
        k = len(self.labels)
        if counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count(self, gold: str, pred: str) -> int:
        g = self.labels.index(gold)
        p = self.labels.index(pred)
        return int(self.counts[g, p])


def _infer_labels(observed: set[str]) -> tuple[str, ...]:
    # Complete a task-standard pair even if only one class was observed.
    if observed and observed <= set(LABELS_A):
        return LABELS_A
    if observed and observed <= set(LABELS_B):
        return LABELS_B
    return tuple(sorted(observed))


def confusion(
    preds: Sequence[str], golds: Sequence[str], labels: Sequence[str] | None = None
) -> ConfusionMatrix:
    """Count (gold, predicted) pairs over an ordered label set.

    With ``labels`` omitted the set is inferred; the standard label pairs
    are completed so a constant predictor still yields a 2x2 matrix.
    """
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} golds")
    if labels is None:
        labels = _infer_labels(set(preds) | set(golds))
    labels = tuple(labels)
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for pred, gold in zip(preds, golds):
        if gold not in index:
            raise ValueError(f"gold label {gold!r} not in label set {labels}")
        if pred not in index:
            raise ValueError(f"predicted label {pred!r} not in label set {labels}")
        counts[index[gold], index[pred]] += 1
    return ConfusionMatrix(labels, counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_f1: float
    per_class: dict[str, ClassMetrics]
    matrix: ConfusionMatrix

    def to_json(self) -> str:
        payload = {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": {
                label: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_class.items()
            },
            "confusion": {
                "labels": list(self.matrix.labels),
                "counts": self.matrix.counts.tolist(),
            },
        }
        return json.dumps(payload, indent=2)

    def to_text(self) -> str:
        lines = [
            f"accuracy  {self.accuracy:.4f}",
            f"macro F1  {self.macro_f1:.4f}",
            "",
            f"{'class':<8} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>9}",
        ]
        for label, m in self.per_class.items():
            lines.append(
                f"{label:<8} {m.precision:>9.4f} {m.recall:>9.4f} {m.f1:>9.4f} {m.support:>9d}"
            )
        lines.append("")
        header = " ".join(f"{label:>7}" for label in self.matrix.labels)
        corner = "gold\\pred"
        lines.append(f"{corner:<9} {header}")
        for i, label in enumerate(self.matrix.labels):
            row = " ".join(f"{int(c):>7d}" for c in self.matrix.counts[i])
            lines.append(f"{label:<9} {row}")
        return "\n".join(lines)


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def report(matrix: ConfusionMatrix) -> EvalReport:
    """Metrics from a confusion matrix; fails on an empty matrix."""
    total = matrix.total
    if total == 0:
        raise ValueError("cannot report on an empty confusion matrix")
    per_class: dict[str, ClassMetrics] = {}
    f1_values = []
    for i, label in enumerate(matrix.labels):
        tp = float(matrix.counts[i, i])
        predicted = float(matrix.counts[:, i].sum())
        gold = float(matrix.counts[i, :].sum())
        precision = _safe_div(tp, predicted)
        recall = _safe_div(tp, gold)
        f1 = _safe_div(2.0 * precision * recall, precision + recall)
        per_class[label] = ClassMetrics(precision, recall, f1, int(gold))
        f1_values.append(f1)
    accuracy = float(np.trace(matrix.counts)) / total
    macro_f1 = float(np.mean(f1_values))
    return EvalReport(accuracy, macro_f1, per_class, matrix)


def baseline_report(golds: Sequence[str], constant: str) -> EvalReport:
    """Metrics of the predictor that always answers ``constant``."""
    if len(golds) == 0:
        raise ValueError("cannot evaluate a baseline on an empty gold set")
    labels = _infer_labels(set(golds) | {constant})
    return report(confusion([constant] * len(golds), golds, labels))
