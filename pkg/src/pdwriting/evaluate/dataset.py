"""Labelled feature matrices built from feature tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureTable
from ..ingest import Group
from ..synth import stage_from_updrs


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    ids: tuple[str, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != len(self.ids) or np.asarray(self.y).shape != (X.shape[0],):
            raise ValueError("dataset arrays disagree in shape")
        if X.shape[1] != len(self.names):
            raise ValueError("one name per feature column required")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", np.asarray(self.y))
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "names", tuple(self.names))

    def __len__(self) -> int:
        return self.X.shape[0]

    def columns(self, idx) -> "Dataset":
        idx = list(idx)
        return Dataset(self.X[:, idx], self.y, self.ids, tuple(self.names[i] for i in idx))

    def class_counts(self) -> dict:
        v, c = np.unique(self.y, return_counts=True)
        return dict(zip(v.tolist(), c.tolist()))


def _row_ids(table: FeatureTable) -> tuple[str, ...]:
    tasks = set(table.tasks)
    if len(tasks) > 1:
        return tuple(f"{i}/{t}" for i, t in zip(table.ids, table.tasks))
    return table.ids


def binary_dataset(table: FeatureTable) -> Dataset:
    """PD (development or validation) is +1, every healthy group -1."""
    y = np.array([1 if Group.parse(g).is_pd else -1 for g in table.groups])
    return Dataset(table.X, y, _row_ids(table), table.names)


def staging_dataset(table: FeatureTable) -> Dataset:
    """Stage 0 for healthy subjects, 1-3 from MDS-UPDRS-III for PD."""
    y = []
    for g, u in zip(table.groups, table.updrs3):
        if Group.parse(g).is_pd:
            if u is None:
                raise ValueError("PD row without an MDS-UPDRS-III score")
            y.append(stage_from_updrs(u))
        else:
            y.append(0)
    return Dataset(table.X, np.array(y), _row_ids(table), table.names)
