"""k-nearest-neighbour vote on standardized features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scaling import Standardization, standardize_fit
from .svm import sq_distances


@dataclass(frozen=True)
class KNNModel:
    Z: np.ndarray
    y: np.ndarray
    k: int
    scaling: Standardization

    family = "knn"

    def _votes(self, X):
        Q = self.scaling.apply(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        d = sq_distances(Q, self.Z)
        order = np.argsort(d, axis=1, kind="stable")[:, : self.k]
        return self.y[order]

    def decision(self, X) -> np.ndarray:
        """Vote margin (n_pos - n_neg) / k in [-1, 1]."""
        return self._votes(X).sum(axis=1) / self.k

    def predict(self, X) -> np.ndarray:
        votes = self._votes(X)
        margin = votes.sum(axis=1)
        # split vote (even k only): follow the single nearest neighbour
        return np.where(margin > 0, 1, np.where(margin < 0, -1, votes[:, 0]))

    def to_dict(self) -> dict:
        return {"Z": self.Z.tolist(), "y": self.y.tolist(), "k": self.k, "scaling": self.scaling.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "KNNModel":
        p = len(d["scaling"]["mean"])
        return cls(np.array(d["Z"], dtype=float).reshape(-1, p), np.array(d["y"], dtype=int), int(d["k"]),
                   Standardization.from_dict(d["scaling"]))


def knn_train(X, y, k: int, standardize: bool = True) -> KNNModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("binary labels must be -1 or +1")
    if k > X.shape[0]:
        raise ValueError(f"k={k} exceeds the training size {X.shape[0]}")
    scaling = standardize_fit(X) if standardize else Standardization.identity(X.shape[1])
    return KNNModel(scaling.apply(X), y.astype(int), int(k), scaling)


def knn_predict(model: KNNModel, x) -> tuple[int, float]:
    return int(model.predict(x)[0]), float(model.decision(x)[0])
