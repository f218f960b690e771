"""Hyperparameter records for the three classifier families."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class KNNParams:
    k: int = 3
    family = "knn"

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be odd and >= 1, got {self.k}")

    def size_key(self) -> tuple:
        return (self.k,)


@dataclass(frozen=True)
class SVMParams:
    c: float = 1.0
    gamma: float = 1.0
    family = "svm"

    def __post_init__(self):
        if not (self.c > 0 and self.gamma > 0):
            raise ValueError("c and gamma must be positive")

    def size_key(self) -> tuple:
        # ties prefer smaller C, then larger gamma
        return (self.c, -self.gamma)


@dataclass(frozen=True)
class RFParams:
    n_trees: int = 10
    max_depth: int = 5
    family = "rf"

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")

    def size_key(self) -> tuple:
        return (self.n_trees, self.max_depth)


FAMILIES = {"knn": KNNParams, "svm": SVMParams, "rf": RFParams}


def params_to_dict(p) -> dict:
    return {"family": p.family, **asdict(p)}


def params_from_dict(d: dict):
    d = dict(d)
    fam = d.pop("family")
    if fam not in FAMILIES:
        raise ValueError(f"unknown classifier family {fam!r}")
    return FAMILIES[fam](**d)
