"""Leave-one-out grid search for the binary and four-class experiments.

Every fold refits the standardization on its training part. For the SVM
the fold's squared-distance matrix is computed once and reused across the
whole (C, gamma) grid; for the forest the largest forest per depth is grown
once and its tree prefixes give the smaller ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..classify import KNNParams, RFParams, SVMParams, params_to_dict, rf_train, solve_dual
from ..classify.params import FAMILIES
from ..classify.scaling import Standardization, standardize_fit
from ..classify.svm import sq_distances
from . import audit
from .dataset import Dataset
from .metrics import BinaryMetrics, ConfusionMatrix, RocCurve, binary_metrics, cohen_kappa, macro_f1, roc_curve

POWERS_OF_TEN = tuple(10.0**e for e in range(-4, 4))
DEFAULT_GRIDS = {
    "knn": {"k": (3, 5, 7)},
    "svm": {"c": POWERS_OF_TEN, "gamma": POWERS_OF_TEN},
    "rf": {"n_trees": (5, 10, 15, 20, 50), "max_depth": (1, 2, 5, 10)},
}
_ALIASES = {"C": "c", "g": "gamma", "n": "n_trees", "N": "n_trees", "trees": "n_trees",
            "d": "max_depth", "D": "max_depth", "depth": "max_depth", "K": "k"}


def expand_grid(family: str, axes: dict | None = None) -> list:
    """Cartesian product of the axes, missing axes taken from the default grid."""
    if family not in FAMILIES:
        raise ValueError(f"unknown classifier family {family!r}")
    full = dict(DEFAULT_GRIDS[family])
    for key, values in (axes or {}).items():
        key = _ALIASES.get(key, key)
        if key not in full:
            raise ValueError(f"{family} grid has no axis {key!r}")
        full[key] = tuple(values)
    keys = list(full)
    grid = [FAMILIES[family](**dict(zip(keys, combo))) for combo in itertools.product(*(full[k] for k in keys))]
    if not grid:
        raise ValueError("empty hyperparameter grid")
    return grid


def parse_grid(family: str, text: str | None) -> list:
    """``"c=0.1,1;gamma=1e-2"`` style override of the default grid."""
    if not text:
        return expand_grid(family)
    axes = {}
    for part in text.replace(" ", "").split(";"):
        if not part:
            continue
        key, sep, vals = part.partition("=")
        if not sep or not vals:
            raise ValueError(f"malformed grid axis {part!r}")
        try:
            nums = [float(v) for v in vals.split(",")]
        except ValueError:
            raise ValueError(f"non-numeric value in grid axis {part!r}") from None
        if _ALIASES.get(key, key) not in ("c", "gamma"):
            if any(v != int(v) for v in nums):
                raise ValueError(f"integer axis {key!r} got a fractional value")
            nums = [int(v) for v in nums]
        axes[key] = tuple(nums)
    return expand_grid(family, axes)


def _check_classes(y: np.ndarray, min_count: int = 2) -> np.ndarray:
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise ValueError("LOOCV needs at least two classes")
    if np.any(counts < min_count):
        bad = classes[counts < min_count][0]
        raise ValueError(f"class {bad!r} has fewer than {min_count} samples")
    return classes


def _fold_scaling(X: np.ndarray, tr: np.ndarray, standardize: bool) -> np.ndarray:
    s = standardize_fit(X[tr]) if standardize else Standardization.identity(X.shape[1])
    return s.apply(X)


@dataclass
class _Tally:
    unconverged: int = 0


def _svm_fold(D, tr, i, y_bin, point_gammas, tally):
    """Held-out score of sample ``i`` for every (c, gamma) point."""
    out = {}
    for gamma, cs in point_gammas.items():
        K = np.exp(-gamma * D)
        Ktr = K[np.ix_(tr, tr)]
        for c in cs:
            sol = solve_dual(Ktr, y_bin[tr], c)
            tally.unconverged += not sol.converged
            out[(c, gamma)] = float(K[i, tr] @ (sol.alpha * y_bin[tr]) + sol.b)
    return out


def _gamma_map(grid) -> dict:
    g = {}
    for p in grid:
        g.setdefault(p.gamma, []).append(p.c)
    return g


def loocv_scores(X, y, grid, seed: int = 0, standardize: bool = True) -> tuple[dict, dict, int]:
    """Held-out binary scores and labels for every grid point.

    Returns ({params: scores}, {params: predictions}, unconverged SMO count).
    All points must share one family.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    _check_classes(y)
    fams = {p.family for p in grid}
    if len(fams) != 1:
        raise ValueError("grid mixes classifier families")
    family = fams.pop()
    n = y.size
    scores = {p: np.zeros(n) for p in grid}
    preds = {p: np.zeros(n, dtype=int) for p in grid}
    tally = _Tally()
    everyone = np.arange(n)
    if family == "rf":
        depths = sorted({p.max_depth for p in grid})
        most = max(p.n_trees for p in grid)
    for i in range(n):
        tr = everyone[everyone != i]
        if family == "svm":
            Z = _fold_scaling(X, tr, standardize)
            fold = _svm_fold(sq_distances(Z, Z), tr, i, y, _gamma_map(grid), tally)
            for p in grid:
                scores[p][i] = fold[(p.c, p.gamma)]
        elif family == "knn":
            Z = _fold_scaling(X, tr, standardize)
            d = sq_distances(Z[i : i + 1], Z[tr])[0]
            ranked = y[tr][np.argsort(d, kind="stable")]
            for p in grid:
                votes = ranked[: p.k]
                scores[p][i] = votes.sum() / p.k
                preds[p][i] = 1 if votes.sum() > 0 else (-1 if votes.sum() < 0 else votes[0])
            continue
        else:
            for depth in depths:
                forest = rf_train(X[tr], y[tr], most, depth, seed=seed)
                for p in grid:
                    if p.max_depth == depth:
                        scores[p][i] = forest.prefix(p.n_trees).decision(X[i])[0]
        for p in grid:
            preds[p][i] = 1 if scores[p][i] >= 0 else -1
    return scores, preds, tally.unconverged


def select_best(grid, correct: dict):
    """Highest accuracy; ties go to the smaller model (``size_key``)."""
    return min(grid, key=lambda p: (-correct[p], p.size_key()))


@dataclass(frozen=True)
class EvalReport:
    family: str
    best_params: object
    confusion: ConfusionMatrix
    metrics: BinaryMetrics
    kappa: float
    roc: RocCurve
    scores: np.ndarray
    labels: np.ndarray
    ids: tuple[str, ...]
    grid: tuple = ()
    unconverged: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        return self.metrics.accuracy

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "best_params": None if self.best_params is None else params_to_dict(self.best_params),
            **self.metrics.to_dict(),
            "kappa": self.kappa,
            "auc": self.roc.auc,
            "confusion": self.confusion.to_dict(),
            "grid": [{"params": params_to_dict(p), "accuracy": a} for p, a in self.grid],
            "unconverged_fits": self.unconverged,
            **({"notes": self.notes} if self.notes else {}),
        }


def binary_report(family, params, scores, preds, labels, ids, grid=(), unconverged=0, notes=None) -> EvalReport:
    cm = ConfusionMatrix.from_labels(labels, preds, classes=(-1, 1))
    return EvalReport(family, params, cm, binary_metrics(cm), cohen_kappa(cm),
                      roc_curve(scores, labels), np.asarray(scores, dtype=float), np.asarray(labels),
                      tuple(ids), tuple(grid), unconverged, dict(notes or {}))


def loocv_predict(dataset: Dataset, params, seed: int = 0, standardize: bool = True) -> tuple[np.ndarray, np.ndarray]:
    s, p, _ = loocv_scores(dataset.X, dataset.y, [params], seed, standardize)
    return s[params], p[params]


def loocv_accuracy(dataset: Dataset, params, seed: int = 0, standardize: bool = True) -> float:
    _, pred = loocv_predict(dataset, params, seed, standardize)
    return float(np.mean(pred == dataset.y))


def loocv_grid_search(dataset: Dataset, family: str, grid=None, seed: int = 0, standardize: bool = True) -> EvalReport:
    """Pick the grid point with the best pooled LOOCV accuracy and report it."""
    audit.record("grid_search")
    grid = expand_grid(family) if grid is None else list(grid)
    if not grid:
        raise ValueError("empty hyperparameter grid")
    if any(p.family != family for p in grid):
        raise ValueError(f"grid points must all be {family} parameters")
    scores, preds, unconverged = loocv_scores(dataset.X, dataset.y, grid, seed, standardize)
    correct = {p: int(np.sum(preds[p] == dataset.y)) for p in grid}
    best = select_best(grid, correct)
    n = len(dataset)
    table = [(p, correct[p] / n) for p in grid]
    return binary_report(family, best, scores[best], preds[best], dataset.y, dataset.ids, table, unconverged)


# ---- four-class staging ----------------------------------------------------


@dataclass(frozen=True)
class StagingReport:
    best_params: SVMParams
    confusion: ConfusionMatrix
    accuracy: float
    f1: float
    kappa: float
    predictions: np.ndarray
    labels: np.ndarray
    ids: tuple[str, ...]
    grid: tuple = ()
    unconverged: int = 0

    def to_dict(self) -> dict:
        return {
            "family": "svm-ova",
            "best_params": params_to_dict(self.best_params),
            "accuracy": self.accuracy,
            "f1": self.f1,
            "kappa": self.kappa,
            "confusion": self.confusion.to_dict(),
            "grid": [{"params": params_to_dict(p), "accuracy": a} for p, a in self.grid],
            "unconverged_fits": self.unconverged,
        }


def loocv_ova_scores(X, y, grid, standardize: bool = True) -> tuple[np.ndarray, dict, int]:
    """Held-out one-vs-all score matrices, (n, n_classes) per grid point."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = _check_classes(y)
    n = y.size
    out = {p: np.zeros((n, classes.size)) for p in grid}
    tally = _Tally()
    everyone = np.arange(n)
    gammas = _gamma_map(grid)
    for i in range(n):
        tr = everyone[everyone != i]
        Z = _fold_scaling(X, tr, standardize)
        D = sq_distances(Z, Z)
        for k, c in enumerate(classes):
            fold = _svm_fold(D, tr, i, np.where(y == c, 1, -1), gammas, tally)
            for p in grid:
                out[p][i, k] = fold[(p.c, p.gamma)]
    return classes, out, tally.unconverged


def loocv_staging(dataset: Dataset, grid=None, standardize: bool = True) -> StagingReport:
    """One-vs-all SVM under LOOCV, grid-searched on multiclass accuracy."""
    audit.record("grid_search")
    grid = expand_grid("svm") if grid is None else list(grid)
    if not grid:
        raise ValueError("empty hyperparameter grid")
    if any(not isinstance(p, SVMParams) for p in grid):
        raise ValueError("staging uses SVM parameters only")
    classes, score_mats, unconverged = loocv_ova_scores(dataset.X, dataset.y, grid, standardize)
    preds = {p: classes[np.argmax(score_mats[p], axis=1)] for p in grid}
    correct = {p: int(np.sum(preds[p] == dataset.y)) for p in grid}
    best = select_best(grid, correct)
    cm = ConfusionMatrix.from_labels(dataset.y, preds[best], classes=classes)
    n = len(dataset)
    return StagingReport(best, cm, cm.accuracy, macro_f1(cm), cohen_kappa(cm), preds[best],
                         dataset.y, dataset.ids, tuple((p, correct[p] / n) for p in grid), unconverged)


__all__ = [
    "DEFAULT_GRIDS", "EvalReport", "KNNParams", "POWERS_OF_TEN", "RFParams", "SVMParams", "StagingReport",
    "binary_report", "expand_grid", "loocv_accuracy", "loocv_grid_search", "loocv_ova_scores",
    "loocv_predict", "loocv_scores", "loocv_staging", "parse_grid", "select_best",
]
