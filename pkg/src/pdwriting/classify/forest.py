"""Random forest of Gini decision trees on raw (unstandardized) features."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tree:
    """Flat node arrays; ``feature == -1`` marks a leaf whose vote is ``value``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # leaf vote in {-1, 0, +1}

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)

    def vote(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                break
            r, n, ff = rows[inner], node[inner], f[inner]
            go_left = X[r, ff] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])
        return self.value[node]

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.array(d["feature"], dtype=int), np.array(d["threshold"], dtype=float),
                   np.array(d["left"], dtype=int), np.array(d["right"], dtype=int),
                   np.array(d["value"], dtype=int))


def best_split(X: np.ndarray, y: np.ndarray, features) -> tuple[int, float, float] | None:
    """Lowest weighted Gini over midpoint thresholds of the candidate features.

    Returns (feature, threshold, impurity) or None when every candidate is
    constant on the node. Ties keep the earlier candidate and lower threshold.
    """
    n = y.size
    pos = y > 0
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        v = X[order, f]
        cut = np.flatnonzero(v[1:] > v[:-1]) + 1  # left side size
        if cut.size == 0:
            continue
        cum = np.cumsum(pos[order])
        lp = cum[cut - 1].astype(float)
        ln = cut.astype(float)
        rp = cum[-1] - lp
        rn = n - ln
        gl = 2.0 * (lp / ln) * (1.0 - lp / ln)
        gr = 2.0 * (rp / rn) * (1.0 - rp / rn)
        w = (ln * gl + rn * gr) / n
        k = int(np.argmin(w))
        if best is None or w[k] < best[2] - 1e-15:
            best = (int(f), 0.5 * (v[cut[k] - 1] + v[cut[k]]), float(w[k]))
    return best


def grow_tree(X: np.ndarray, y: np.ndarray, max_depth: int, rng: np.random.Generator) -> Tree:
    p = X.shape[1]
    n_cand = math.ceil(math.sqrt(p))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        for lst, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1), (value, 0)):
            lst.append(v)
        return len(feature) - 1

    def leaf(i, idx):
        value[i] = int(np.sign(y[idx].sum()))

    stack = [(new_node(), np.arange(y.size), 0)]
    while stack:
        i, idx, depth = stack.pop()
        ys = y[idx]
        if depth >= max_depth or idx.size < 2 or np.all(ys == ys[0]):
            leaf(i, idx)
            continue
        cand = rng.choice(p, size=n_cand, replace=False)
        split = best_split(X[idx], ys, cand)
        if split is None:
            leaf(i, idx)
            continue
        f, thr, _ = split
        go = X[idx, f] <= thr
        li, ri = new_node(), new_node()
        feature[i], threshold[i], left[i], right[i] = f, thr, li, ri
        # right pushed first so the left subtree is grown (and draws) first
        stack.append((ri, idx[~go], depth + 1))
        stack.append((li, idx[go], depth + 1))
    return Tree(np.array(feature), np.array(threshold, dtype=float), np.array(left),
                np.array(right), np.array(value))


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    max_depth: int
    seed: int

    family = "rf"

    def decision(self, X) -> np.ndarray:
        """Vote margin (n_pos - n_neg) / n_trees in [-1, 1]."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        votes = np.stack([t.vote(X) for t in self.trees])
        return votes.sum(axis=0) / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) >= 0, 1, -1)

    def prefix(self, n_trees: int) -> "ForestModel":
        """The forest made of the first ``n_trees`` trees; equals training with that count."""
        return ForestModel(self.trees[:n_trees], self.max_depth, self.seed)

    def to_dict(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees], "max_depth": self.max_depth, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(tuple(Tree.from_dict(t) for t in d["trees"]), int(d["max_depth"]), int(d["seed"]))


def rf_train(X, y, n_trees: int, max_depth: int, seed: int = 0) -> ForestModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("empty training data")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("binary labels must be -1 or +1")
    if n_trees < 1 or max_depth < 1:
        raise ValueError("n_trees and max_depth must be >= 1")
    n = y.size
    trees = []
    # child i of the seed sequence does not depend on n_trees, so forests nest
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, n, size=n)
        trees.append(grow_tree(X[boot], y[boot].astype(int), max_depth, rng))
    return ForestModel(tuple(trees), int(max_depth), int(seed))
