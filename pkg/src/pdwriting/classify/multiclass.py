"""One-vs-all wrapper over binary RBF SVMs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SVMParams
from .scaling import Standardization, standardize_fit
from .svm import SVMModel, svm_train


@dataclass(frozen=True)
class OVAModel:
    classes: np.ndarray
    models: tuple[SVMModel, ...]

    family = "ova"

    def decision(self, X) -> np.ndarray:
        """(n, n_classes) matrix of per-class SVM scores."""
        return np.column_stack([m.decision(X) for m in self.models])

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the lowest class index on ties
        return self.classes[np.argmax(self.decision(X), axis=1)]

    def to_dict(self) -> dict:
        return {"classes": self.classes.tolist(), "models": [m.to_dict() for m in self.models]}

    @classmethod
    def from_dict(cls, d: dict) -> "OVAModel":
        return cls(np.array(d["classes"]), tuple(SVMModel.from_dict(m) for m in d["models"]))


def ova_multiclass_train(X, y, base: SVMParams, seed: int = 0, standardize: bool = True) -> OVAModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise ValueError("one-vs-all needs at least 2 classes")
    small = classes[counts < 2]
    if small.size:
        raise ValueError(f"class {small[0]!r} has fewer than 2 samples")
    scaling = standardize_fit(X) if standardize else Standardization.identity(X.shape[1])
    models = tuple(
        svm_train(X, np.where(y == c, 1, -1), base.c, base.gamma, seed=seed, scaling=scaling)
        for c in classes
    )
    return OVAModel(classes, models)


def ova_predict(model: OVAModel, x) -> int:
    return model.predict(x)[0].item()
