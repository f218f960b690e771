"""Soft-margin RBF support vector machine trained by SMO.

The working pair is the maximal violating pair of the dual KKT conditions:
``i`` maximises ``-y G`` over the up-set and ``j`` minimises it over the
low-set, which is the pair with the largest error gap ``|E_i - E_j|``
among those that can still move. Scans run in index order, so training is
deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .scaling import Standardization, standardize_fit

KKT_TOL = 1e-3
MAX_PASSES = 10_000


class ConvergenceWarning(UserWarning):
    pass


def sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.einsum("ij,ij->i", A, A)[:, None]
    bb = np.einsum("ij,ij->i", B, B)[None, :]
    return np.maximum(aa + bb - 2.0 * A @ B.T, 0.0)


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    return np.exp(-gamma * sq_distances(np.atleast_2d(A), np.atleast_2d(B)))


@numba.njit(cache=True)
def _smo(K, y, c, tol, max_iter):
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a
    it = 0
    gap = np.inf
    while it < max_iter:
        i = -1
        j = -1
        g_max = -np.inf
        g_min = np.inf
        for t in range(n):
            v = -y[t] * grad[t]
            up = (y[t] > 0 and alpha[t] < c) or (y[t] < 0 and alpha[t] > 0)
            low = (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < c)
            if up and v > g_max:
                g_max = v
                i = t
            if low and v < g_min:
                g_min = v
                j = t
        gap = g_max - g_min
        if i < 0 or j < 0 or gap < tol:
            break
        yi = y[i]
        yj = y[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        # step along the feasible direction d_i = y_i, d_j = -y_j
        step = gap / quad
        ai_old = alpha[i]
        aj_old = alpha[j]
        lim_i = c - ai_old if yi > 0 else ai_old
        lim_j = aj_old if yj > 0 else c - aj_old
        if step > lim_i:
            step = lim_i
        if step > lim_j:
            step = lim_j
        alpha[i] = ai_old + yi * step
        alpha[j] = aj_old - yj * step
        # snap to the box to keep bound membership exact
        for t in (i, j):
            if alpha[t] < 1e-14 * c:
                alpha[t] = 0.0
            elif alpha[t] > c * (1.0 - 1e-14):
                alpha[t] = c
        dai = alpha[i] - ai_old
        daj = alpha[j] - aj_old
        for t in range(n):
            grad[t] += y[t] * (yi * K[t, i] * dai + yj * K[t, j] * daj)
        it += 1
    # bias from free vectors, else the middle of the feasible interval
    s = 0.0
    nf = 0
    ub = np.inf
    lb = -np.inf
    for t in range(n):
        yg = y[t] * grad[t]
        if 0.0 < alpha[t] < c:
            s += yg
            nf += 1
        elif (y[t] > 0 and alpha[t] == 0.0) or (y[t] < 0 and alpha[t] == c):
            ub = min(ub, yg)
        else:
            lb = max(lb, yg)
    rho = s / nf if nf > 0 else 0.5 * (ub + lb)
    return alpha, -rho, it, gap


@dataclass(frozen=True)
class SVMModel:
    """RBF SVM. ``coef`` holds alpha_i * y_i for the support vectors only."""

    support: np.ndarray  # standardized support vectors
    coef: np.ndarray
    b: float
    gamma: float
    c: float
    scaling: Standardization
    converged: bool = True
    iterations: int = 0
    kkt_gap: float = 0.0
    seed: int = 0

    family = "svm"

    def decision(self, X) -> np.ndarray:
        Z = self.scaling.apply(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        if self.coef.size == 0:
            return np.full(Z.shape[0], self.b)
        return rbf_kernel(Z, self.support, self.gamma) @ self.coef + self.b

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) >= 0, 1, -1)

    def to_dict(self) -> dict:
        return {
            "support": self.support.tolist(), "coef": self.coef.tolist(), "b": self.b,
            "gamma": self.gamma, "c": self.c, "scaling": self.scaling.to_dict(),
            "converged": self.converged, "iterations": self.iterations,
            "kkt_gap": self.kkt_gap, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SVMModel":
        p = len(d["scaling"]["mean"])
        return cls(np.array(d["support"], dtype=float).reshape(-1, p), np.array(d["coef"], dtype=float),
                   float(d["b"]), float(d["gamma"]), float(d["c"]), Standardization.from_dict(d["scaling"]),
                   bool(d["converged"]), int(d["iterations"]), float(d["kkt_gap"]), int(d["seed"]))


@dataclass(frozen=True)
class DualSolution:
    alpha: np.ndarray
    b: float
    iterations: int
    kkt_gap: float

    @property
    def converged(self) -> bool:
        return self.kkt_gap < KKT_TOL


def check_binary(y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("labels must be a non-empty 1-D array")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("binary labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise ValueError("training labels contain a single class")
    return y.astype(np.float64)


def solve_dual(K: np.ndarray, y, c: float, tol: float = KKT_TOL, max_passes: int = MAX_PASSES) -> DualSolution:
    """SMO on a precomputed kernel matrix."""
    yf = check_binary(y)
    if not c > 0:
        raise ValueError("c must be positive")
    K = np.ascontiguousarray(K, dtype=np.float64)
    alpha, b, it, gap = _smo(K, yf, float(c), float(tol), int(max_passes) * max(yf.size, 1))
    return DualSolution(alpha, float(b), int(it), float(gap))


def dual_objective(alpha, K, y) -> float:
    """W(alpha) = sum(alpha) - 0.5 sum_ij alpha_i alpha_j y_i y_j K_ij."""
    a = np.asarray(alpha, dtype=np.float64) * np.asarray(y, dtype=np.float64)
    return float(np.sum(alpha) - 0.5 * a @ K @ a)


def svm_train(X, y, c: float, gamma: float, seed: int = 0, standardize: bool = True,
              scaling: Standardization | None = None) -> SVMModel:
    X = np.asarray(X, dtype=np.float64)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if scaling is None:
        scaling = standardize_fit(X) if standardize else Standardization.identity(X.shape[1])
    Z = scaling.apply(X)
    sol = solve_dual(rbf_kernel(Z, Z, gamma), y, c)
    if not sol.converged:
        warnings.warn(f"SMO stopped after {sol.iterations} updates with KKT gap {sol.kkt_gap:.3g}",
                      ConvergenceWarning, stacklevel=2)
    sv = sol.alpha > 0
    coef = sol.alpha[sv] * np.asarray(y, dtype=np.float64)[sv]
    return SVMModel(Z[sv], coef, sol.b, float(gamma), float(c), scaling,
                    sol.converged, sol.iterations, sol.kkt_gap, int(seed))


def svm_decision(model: SVMModel, X) -> np.ndarray:
    return model.decision(X)
