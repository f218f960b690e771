"""Confusion matrices, binary metrics, Cohen's kappa and ROC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted, both in ``classes`` order."""

    counts: np.ndarray
    classes: tuple

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] != len(self.classes):
            raise ValueError("confusion matrix must be square and match the class list")
        if np.any(c < 0):
            raise ValueError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "classes", tuple(self.classes))

    @classmethod
    def from_labels(cls, true, pred, classes=None) -> "ConfusionMatrix":
        true, pred = np.asarray(true), np.asarray(pred)
        if classes is None:
            classes = np.unique(np.concatenate([true, pred]))
        classes = [c.item() if hasattr(c, "item") else c for c in classes]
        index = {c: i for i, c in enumerate(classes)}
        m = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(true.tolist(), pred.tolist()):
            m[index[t], index[p]] += 1
        return cls(m, tuple(classes))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total) if self.total else 0.0

    def row_percent(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True)
        return np.where(rows > 0, 100.0 * self.counts / np.maximum(rows, 1), 0.0)

    def to_dict(self) -> dict:
        return {"classes": list(self.classes), "counts": self.counts.tolist(),
                "row_percent": np.round(self.row_percent(), 1).tolist()}


@dataclass(frozen=True)
class BinaryMetrics:
    accuracy: float
    sensitivity: float
    specificity: float
    f1: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "sensitivity": self.sensitivity, "specificity": self.specificity,
                "f1": self.f1, "degenerate": self.degenerate}


def _ratio(num: float, den: float) -> tuple[float, bool]:
    return (num / den, False) if den > 0 else (0.0, True)


def binary_metrics(cm) -> BinaryMetrics:
    """Layout [[TN, FP], [FN, TP]]; the second class (PD) is positive."""
    c = cm.counts if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    if c.shape != (2, 2):
        raise ValueError("binary metrics need a 2x2 confusion matrix")
    (tn, fp), (fn, tp) = c.tolist()
    acc, d0 = _ratio(tp + tn, tn + fp + fn + tp)
    sens, d1 = _ratio(tp, tp + fn)
    spec, d2 = _ratio(tn, tn + fp)
    f1, d3 = _ratio(2 * tp, 2 * tp + fp + fn)
    return BinaryMetrics(acc, sens, spec, f1, d0 or d1 or d2 or d3)


def cohen_kappa_flagged(cm) -> tuple[float, bool]:
    """(kappa, degenerate); chance agreement of 1 gives kappa 0 and the flag."""
    c = np.asarray(cm.counts if isinstance(cm, ConfusionMatrix) else cm, dtype=np.float64)
    n = c.sum()
    if not n > 0:
        raise ValueError("kappa needs a non-empty confusion matrix")
    po = np.trace(c) / n
    pe = float(np.sum(c.sum(axis=0) * c.sum(axis=1)) / n**2)
    if pe >= 1.0 - 1e-15:
        return 0.0, True
    return float((po - pe) / (1.0 - pe)), False


def cohen_kappa(cm) -> float:
    return cohen_kappa_flagged(cm)[0]


def macro_f1(cm: ConfusionMatrix) -> float:
    c = cm.counts.astype(np.float64)
    tp = np.diag(c)
    den = 2 * tp + (c.sum(axis=0) - tp) + (c.sum(axis=1) - tp)
    return float(np.mean(np.where(den > 0, 2 * tp / np.maximum(den, 1), 0.0)))


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))


def roc_curve(scores, labels) -> RocCurve:
    """One point per distinct score (predict positive when score >= threshold).

    Equal scores enter together, so ties trace a diagonal segment and count
    one half in the AUC.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels) > 0
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    thr = np.r_[np.inf, s[last]]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocCurve(fpr, tpr, thr, auc)
