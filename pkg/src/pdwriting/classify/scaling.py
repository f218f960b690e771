"""Per-feature z-scoring with training statistics only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # bool mask; these columns map to 0

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        safe = np.where(self.constant, 1.0, self.std)
        Z = (X - self.mean) / safe
        Z[..., self.constant] = 0.0
        return Z

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "constant": self.constant.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardization":
        return cls(np.array(d["mean"], dtype=float), np.array(d["std"], dtype=float),
                   np.array(d["constant"], dtype=bool))

    @classmethod
    def identity(cls, p: int) -> "Standardization":
        return cls(np.zeros(p), np.ones(p), np.zeros(p, dtype=bool))


def standardize_fit(X) -> Standardization:
    """Column means and sample (n-1) standard deviations."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("standardization needs a non-empty 2-D matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    scale = np.maximum(np.abs(mean), 1.0)
    constant = ~(std > 1e-12 * scale)
    return Standardization(mean, std, constant)


def standardize_apply(s: Standardization, X) -> np.ndarray:
    return s.apply(X)
