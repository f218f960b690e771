"""Named feature vectors and the per-recording feature table CSV."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class FeatureVector:
    """Ordered feature values; ``sources[i]`` names the extractor of ``values[i]``."""

    names: tuple[str, ...]
    values: np.ndarray
    sources: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", vals)
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        if len(self.names) != vals.size:
            raise ValueError(f"{len(self.names)} names for {vals.size} values")
        if not self.sources:
            object.__setattr__(self, "sources", ("",) * vals.size)
        elif len(self.sources) != vals.size:
            raise ValueError("one source per feature required")

    @classmethod
    def from_pairs(cls, source: str, pairs: Sequence[tuple[str, float]], **meta) -> "FeatureVector":
        names = tuple(n for n, _ in pairs)
        return cls(names, np.array([v for _, v in pairs], dtype=np.float64), (source,) * len(names), dict(meta))

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))

    def concat(self, other: "FeatureVector") -> "FeatureVector":
        return FeatureVector(
            self.names + other.names,
            np.concatenate([self.values, other.values]),
            self.sources + other.sources,
            {**self.meta, **other.meta},
        )


ID_COLUMNS = ("id", "group", "updrs3", "task")


@dataclass(frozen=True)
class FeatureTable:
    """One row per recording.

    ``groups`` holds the raw group strings from the manifest so callers can
    derive binary, staging, or validation splits themselves.
    """

    ids: tuple[str, ...]
    groups: tuple[str, ...]
    updrs3: tuple[int | None, ...]
    tasks: tuple[str, ...]
    names: tuple[str, ...]
    X: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64).reshape(len(self.ids), len(self.names))
        object.__setattr__(self, "X", X)
        n = len(self.ids)
        if not (len(self.groups) == len(self.updrs3) == len(self.tasks) == n):
            raise ValueError("ragged feature table")

    def __len__(self) -> int:
        return len(self.ids)

    def select(self, mask) -> "FeatureTable":
        mask = np.asarray(mask)
        idx = np.flatnonzero(mask) if mask.dtype == bool else mask
        pick = lambda seq: tuple(seq[i] for i in idx)  # noqa: E731
        return FeatureTable(pick(self.ids), pick(self.groups), pick(self.updrs3), pick(self.tasks), self.names, self.X[idx])

    def columns(self, names_or_idx) -> "FeatureTable":
        idx = [self.names.index(c) if isinstance(c, str) else int(c) for c in names_or_idx]
        return FeatureTable(self.ids, self.groups, self.updrs3, self.tasks, tuple(self.names[i] for i in idx), self.X[:, idx])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update("\x1f".join(self.names).encode())
        h.update(np.ascontiguousarray(self.X).tobytes())
        return h.hexdigest()[:16]


def write_feature_table(table: FeatureTable) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ID_COLUMNS + table.names)
    for i in range(len(table)):
        up = "" if table.updrs3[i] is None else str(table.updrs3[i])
        w.writerow([table.ids[i], table.groups[i], up, table.tasks[i], *(repr(float(v)) for v in table.X[i])])
    return buf.getvalue().encode("utf-8")


def read_feature_table(content: bytes | str | Path) -> FeatureTable:
    if isinstance(content, Path):
        content = content.read_bytes()
    text = content.decode("utf-8") if isinstance(content, (bytes, bytearray)) else content
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty feature table")
    header = tuple(rows[0])
    for col in ("id", "group"):
        if col not in header:
            raise ValueError(f"feature table missing {col!r} column")
    meta_idx = {c: header.index(c) for c in ID_COLUMNS if c in header}
    feat_idx = [i for i, c in enumerate(header) if c not in ID_COLUMNS]
    ids, groups, updrs, tasks, X = [], [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields")
        ids.append(row[meta_idx["id"]])
        groups.append(row[meta_idx["group"]])
        up = row[meta_idx["updrs3"]] if "updrs3" in meta_idx else ""
        updrs.append(int(float(up)) if up.strip() else None)
        tasks.append(row[meta_idx["task"]] if "task" in meta_idx else "")
        try:
            X.append([float(row[i]) for i in feat_idx])
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric feature value") from None
    return FeatureTable(tuple(ids), tuple(groups), tuple(updrs), tuple(tasks),
                        tuple(header[i] for i in feat_idx), np.array(X, dtype=np.float64).reshape(len(ids), len(feat_idx)))
