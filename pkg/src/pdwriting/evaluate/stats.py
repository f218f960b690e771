"""Two-sample Kruskal-Wallis and Welch tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _st


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p: float
    df: float

    __test__ = False  # not a pytest class


def _sample(a, name: str, min_size: int) -> np.ndarray:
    x = np.asarray(a, dtype=np.float64).reshape(-1)
    if x.size < min_size:
        raise ValueError(f"sample {name} needs at least {min_size} values")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"sample {name} has non-finite values")
    return x


def kruskal_wallis(a, b) -> TestResult:
    """H with tie correction, chi-square reference with 1 degree of freedom.

    The chi-square approximation is poor below 5 values per group; H itself
    is exact for any size.
    """
    x, y = _sample(a, "a", 1), _sample(b, "b", 1)
    pooled = np.concatenate([x, y])
    n = pooled.size
    ranks = _st.rankdata(pooled)
    _, counts = np.unique(pooled, return_counts=True)
    tie = 1.0 - np.sum(counts**3 - counts) / (n**3 - n) if n > 1 else 0.0
    if tie <= 0:
        return TestResult(0.0, 1.0, 1.0)
    r1, r2 = ranks[: x.size].sum(), ranks[x.size:].sum()
    h = 12.0 / (n * (n + 1)) * (r1**2 / x.size + r2**2 / y.size) - 3.0 * (n + 1)
    h = max(h / tie, 0.0)
    return TestResult(float(h), float(_st.chi2.sf(h, 1)), 1.0)


def welch_t(a, b) -> TestResult:
    """Welch t with Welch-Satterthwaite df and a two-sided p-value."""
    x, y = _sample(a, "a", 2), _sample(b, "b", 2)
    va, vb = x.var(ddof=1) / x.size, y.var(ddof=1) / y.size
    if va + vb == 0:
        raise ValueError("both samples have zero variance")
    t = (x.mean() - y.mean()) / np.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (x.size - 1) + vb**2 / (y.size - 1))
    return TestResult(float(t), float(min(1.0, 2.0 * _st.t.sf(abs(t), df))), float(df))
