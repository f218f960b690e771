"""PCA feature relevance and the incremental-accuracy curve.

The relevance of feature ``i`` is ``rho_i = sum_j |lambda_j v_ji|`` over the
eigenpairs of the covariance of the standardized features. The number of
retained features ``q`` is the number of principal components needed for
90% of the total variance; the top-``q`` features by ``rho`` are kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import SVMParams
from .classify.scaling import standardize_fit
from .evaluate.dataset import Dataset
from .evaluate.loocv import loocv_accuracy

VARIANCE_KEPT = 0.90


@dataclass(frozen=True)
class Eigen:
    values: np.ndarray  # descending
    vectors: np.ndarray  # columns
    sweeps: int
    off_norm: float


def jacobi_eigh(A, tol: float = 1e-10, max_sweeps: int = 100) -> Eigen:
    """Cyclic Jacobi rotations until the off-diagonal norm is below ``tol * trace``.

    Eigenvalues are sorted in descending order; each eigenvector is signed so
    that its largest-magnitude entry is positive.
    """
    a = np.array(A, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("Jacobi needs a square matrix")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("Jacobi needs a symmetric matrix")
    n = a.shape[0]
    v = np.eye(n)
    scale = max(abs(np.trace(a)), np.abs(a).max(), 1e-300)
    sweeps = 0

    mask = ~np.eye(n, dtype=bool)

    def off(m):
        # summed directly; total minus diagonal cancels catastrophically near convergence
        return float(np.sqrt(np.sum(m[mask] ** 2)))

    while off(a) > tol * scale and sweeps < max_sweeps:
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * (abs(a[p, p]) + abs(a[q, q])) or apq == 0.0:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    vals, v = vals[order], v[:, order]
    lead = np.argmax(np.abs(v), axis=0)
    v = v * np.where(v[lead, np.arange(n)] < 0, -1.0, 1.0)
    return Eigen(vals, v, sweeps, float(off(a)))


@dataclass(frozen=True)
class RelevanceRanking:
    rho: np.ndarray
    order: np.ndarray  # feature indices by descending rho
    retained: int
    eigvals: np.ndarray
    explained_variance: np.ndarray  # cumulative fractions
    eigvecs: np.ndarray

    @property
    def selected(self) -> np.ndarray:
        return self.order[: self.retained]


def standardized_covariance(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 2:
        raise ValueError("relevance needs at least 2 samples and 2 features")
    s = standardize_fit(X)
    if np.all(s.constant):
        raise ValueError("every feature has zero variance")
    Z = s.apply(X)
    return Z.T @ Z / (X.shape[0] - 1)


def pca_relevance(X, variance_kept: float = VARIANCE_KEPT) -> RelevanceRanking:
    cov = standardized_covariance(X)
    eig = jacobi_eigh(cov)
    lam = np.clip(eig.values, 0.0, None)  # round-off negatives of a PSD matrix
    rho = np.abs(eig.vectors * lam[None, :]).sum(axis=1)
    order = np.argsort(-rho, kind="stable")
    cum = np.cumsum(lam) / lam.sum()
    q = int(np.searchsorted(cum, variance_kept - 1e-12) + 1)
    return RelevanceRanking(rho, order, min(q, rho.size), eig.values, cum, eig.vectors)


def incremental_accuracy_curve(dataset: Dataset, ranking: RelevanceRanking, svm_params: SVMParams,
                               seed: int = 0, standardize: bool = True) -> list[tuple[int, float]]:
    """LOOCV accuracy of a fixed SVM on the top-k features, k = 1..q."""
    if ranking.rho.size != dataset.X.shape[1]:
        raise ValueError("ranking and dataset disagree on the feature count")
    return [
        (k, loocv_accuracy(dataset.columns(ranking.order[:k]), svm_params, seed, standardize))
        for k in range(1, ranking.retained + 1)
    ]


def ranking_rows(names, ranking: RelevanceRanking, curve=None) -> list[tuple]:
    """(rank, feature, rho, cumulative accuracy) for the retained features."""
    acc = dict(curve or [])
    return [
        (k + 1, names[i], float(ranking.rho[i]), acc.get(k + 1, ""))
        for k, i in enumerate(ranking.selected)
    ]
