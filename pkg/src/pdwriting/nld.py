"""Phase-space reconstruction and nonlinear-dynamics measures.

All measures operate on a 1-D series. Entropies use Chebyshev distance on
delay templates with unit lag; correlation dimension and the Lyapunov
exponent use Euclidean distance on the delay embedding chosen by the mutual
information / false-nearest-neighbour estimators.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy.ndimage import gaussian_filter

from .features import FeatureVector
from .ingest import Recording
from .kinematics import Series, radial_trajectory

NLD_NAMES = ("apen", "sampen", "gauss_apen", "gauss_sampen", "cd", "hurst", "lle", "lzc")
CD_THEILER = 10
CD_N_EPS = 20
CD_FIT_BINS = slice(4, 15)  # bins 5..15 of 20, 1-based
LLE_HORIZON = 20
MI_BINS = 64
MI_SMOOTH = 3.0


class NldError(ValueError):
    pass


def _as_array(s) -> np.ndarray:
    if isinstance(s, Series):
        return s.values
    return np.asarray(s, dtype=np.float64).reshape(-1)


@dataclass(frozen=True)
class EmbeddingParams:
    m: int
    tau: int

    def __post_init__(self):
        if self.m < 1 or self.tau < 1:
            raise ValueError("embedding needs m >= 1 and tau >= 1")

    def rows(self, n: int) -> int:
        return n - (self.m - 1) * self.tau


def embed(s, params: EmbeddingParams) -> np.ndarray:
    """Delay vectors ``(s[k], s[k+tau], ..., s[k+(m-1)tau])`` as rows."""
    x = _as_array(s)
    rows = params.rows(x.size)
    if rows < 2:
        raise NldError(f"series of length {x.size} too short for m={params.m}, tau={params.tau}")
    idx = np.arange(rows)[:, None] + params.tau * np.arange(params.m)[None, :]
    return x[idx]


# -- delay and dimension estimation ----------------------------------------

def mutual_information(a: np.ndarray, b: np.ndarray, bins: int = MI_BINS, edges=None,
                       smooth: float = MI_SMOOTH) -> float:
    """Plug-in estimate from a Gaussian-smoothed 2-D histogram, in nats.

    Smoothing (``smooth`` bins of standard deviation) stops a deterministic
    signal, whose joint mass sits on a thin curve, from producing a jagged
    lag curve through cell-counting artefacts.
    """
    if edges is None:
        lo, hi = min(a.min(), b.min()), max(a.max(), b.max())
        edges = np.linspace(lo, hi, bins + 1)
    joint, _, _ = np.histogram2d(a, b, bins=[edges, edges])
    if smooth > 0:
        joint = gaussian_filter(joint, smooth, mode="constant")
    pxy = joint / joint.sum()
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    nz = pxy > 1e-300
    return float(np.sum(pxy[nz] * np.log(pxy[nz] / np.outer(px, py)[nz])))


def mutual_information_curve(s, max_lag: int, bins: int = MI_BINS) -> np.ndarray:
    """``mi[k]`` for lags ``0..max_lag`` on a shared set of bin edges."""
    x = _as_array(s)
    edges = np.linspace(x.min(), x.max(), bins + 1)
    return np.array([mutual_information(x[: x.size - k], x[k:], edges=edges) for k in range(max_lag + 1)])


def delay_mutual_information(s, max_lag: int | None = None, bins: int = MI_BINS, rel_tol: float = 0.005) -> int:
    """First minimum of the lagged mutual information.

    A lag counts as the first minimum when the curve turns upward there, or
    when it is already within ``rel_tol`` of the curve's floor (relative to
    the drop from lag 0). The second clause keeps estimator jitter on a flat
    curve, as for white noise, from pushing the answer past lag 1. Warns and
    returns ``max_lag`` if neither happens.
    """
    x = _as_array(s)
    if max_lag is None:
        max_lag = max(2, min(x.size // 4, 200))
    if x.size < 4 * max_lag:
        raise NldError(f"need at least {4 * max_lag} samples for max_lag={max_lag}")
    if np.ptp(x) == 0:
        raise NldError("constant series has zero entropy")
    mi = mutual_information_curve(x, max_lag + 1, bins)
    floor = mi[1:].min()
    span = mi[0] - floor
    for k in range(1, max_lag + 1):
        if mi[k] <= mi[k + 1] or mi[k] - floor <= rel_tol * span:
            return k
    warnings.warn("no mutual-information minimum within max_lag", RuntimeWarning, stacklevel=2)
    return max_lag


def _nearest_neighbours(pts: np.ndarray, exclude: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Index and distance of each row's nearest other row.

    Rows within ``exclude`` steps in time are skipped, as are exact
    duplicates (zero distance).
    """
    n = pts.shape[0]
    nn = np.empty(n, dtype=int)
    dist = np.empty(n)
    sq = np.einsum("ij,ij->i", pts, pts)
    block = 512
    for start in range(0, n, block):
        stop = min(n, start + block)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * pts[start:stop] @ pts.T
        np.maximum(d2, 0.0, out=d2)
        rows = np.arange(start, stop)
        cols = np.arange(n)
        mask = np.abs(rows[:, None] - cols[None, :]) <= exclude
        d2[mask] = np.inf
        d2[d2 <= 0.0] = np.inf
        j = np.argmin(d2, axis=1)
        nn[start:stop] = j
        dist[start:stop] = np.sqrt(d2[np.arange(stop - start), j])
    return nn, dist


def false_nearest_fraction(s, m: int, tau: int, rtol: float = 15.0, atol: float = 2.0) -> float:
    x = _as_array(s)
    n_pts = x.size - m * tau
    if n_pts < 10:
        raise NldError(f"series too short to test m={m} at tau={tau}")
    pts = embed(x[: n_pts + (m - 1) * tau], EmbeddingParams(m, tau))
    nxt = x[m * tau : m * tau + n_pts]
    nn, d = _nearest_neighbours(pts)
    ok = np.isfinite(d)
    if not ok.any():
        return 1.0
    i = np.flatnonzero(ok)
    j = nn[i]
    extra = np.abs(nxt[i] - nxt[j])
    r_next = np.sqrt(d[i] ** 2 + extra**2)
    ra = x.std()
    false = (extra / d[i] > rtol) | (r_next / ra > atol)
    return float(false.mean())


def embedding_dimension_fnn(s, tau: int, max_dim: int = 10, threshold: float = 0.01,
                            rtol: float = 15.0, atol: float = 2.0) -> int:
    """Smallest m whose false-nearest-neighbour fraction drops below 1%."""
    x = _as_array(s)
    if x.size - 2 * tau < 10:
        raise NldError("series too short to embed at m=2")
    for m in range(1, max_dim + 1):
        if x.size - m * tau < 10:
            return m
        if false_nearest_fraction(x, m, tau, rtol, atol) < threshold:
            return m
    return max_dim


# -- entropies ---------------------------------------------------------------

def _tolerance(x: np.ndarray, r_tol: float | None) -> float:
    if r_tol is None:
        return 0.2 * x.std(ddof=1)
    if r_tol < 0:
        raise ValueError("tolerance must be non-negative")
    return float(r_tol)


def _chebyshev(x: np.ndarray, m: int, count: int) -> np.ndarray:
    """Pairwise Chebyshev distances between the first ``count`` m-templates."""
    d = np.zeros((count, count))
    for k in range(m):
        seg = x[k : k + count]
        np.maximum(d, np.abs(seg[:, None] - seg[None, :]), out=d)
    return d


def _check_length(x: np.ndarray, m: int):
    if x.size < m + 2:
        raise NldError(f"series of length {x.size} too short for m={m}")


class _Templates:
    """Chebyshev distances for length-m templates (all n-m+1 of them) and
    length-(m+1) templates (n-m), shared by every entropy of one series."""

    def __init__(self, x: np.ndarray, m: int):
        n = x.size
        self.x, self.m = x, m
        self.dm = _chebyshev(x, m, n - m + 1)
        count = n - m
        tail = x[m : m + count]
        # the (m+1)-th coordinate only widens the first n-m rows/columns
        self.dm1 = np.maximum(self.dm[:count, :count], np.abs(tail[:, None] - tail[None, :]))
        self._kernels = {}

    def kernels(self, R: float) -> tuple[np.ndarray, np.ndarray]:
        if R not in self._kernels:
            s = 10.0 * R * R
            self._kernels[R] = (np.exp(-(self.dm * self.dm) / s), np.exp(-(self.dm1 * self.dm1) / s))
        return self._kernels[R]


def _templates(x: np.ndarray, m: int, cache: _Templates | None) -> _Templates:
    if cache is not None and cache.m == m and cache.x is x:
        return cache
    return _Templates(x, m)


def approximate_entropy(s, m: int = 2, r_tol: float | None = None, _cache: _Templates | None = None) -> float:
    """Pincus ApEn with self-matches counted."""
    x = _as_array(s) if _cache is None else _cache.x
    _check_length(x, m)
    r = _tolerance(x, r_tol)
    t = _templates(x, m, _cache)
    phi_m = np.mean(np.log((t.dm <= r).mean(axis=1)))
    phi_m1 = np.mean(np.log((t.dm1 <= r).mean(axis=1)))
    return float(max(phi_m - phi_m1, 0.0))


@dataclass(frozen=True)
class SampleEntropy:
    value: float
    matches_m: float
    matches_m1: float

    @property
    def undefined(self) -> bool:
        return not math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value


def _pair_sum(mat: np.ndarray) -> float:
    return float((mat.sum() - np.trace(mat)) / 2.0)


def _sampen_from_counts(b: float, a: float) -> float:
    if a <= 0 or b <= 0:
        return math.inf
    return max(-math.log(a / b), 0.0)


def sample_entropy_counts(s, m: int = 2, r_tol: float | None = None,
                          _cache: _Templates | None = None) -> SampleEntropy:
    """Richman-Moorman SampEn; ``value`` is +inf when no (m+1)-match exists."""
    x = _as_array(s) if _cache is None else _cache.x
    _check_length(x, m)
    r = _tolerance(x, r_tol)
    t = _templates(x, m, _cache)
    count = x.size - m
    b = _pair_sum((t.dm[:count, :count] <= r).astype(float))
    a = _pair_sum((t.dm1 <= r).astype(float))
    return SampleEntropy(_sampen_from_counts(b, a), b, a)


def sample_entropy(s, m: int = 2, r_tol: float | None = None) -> float:
    return sample_entropy_counts(s, m, r_tol).value


def gaussian_kernel_entropy(s, m: int = 2, R: float | None = None, variant: str = "approx",
                            _cache: _Templates | None = None) -> float:
    """ApEn / SampEn with hard matches replaced by ``exp(-d^2 / (10 R^2))``."""
    x = _as_array(s) if _cache is None else _cache.x
    _check_length(x, m)
    R = _tolerance(x, R)
    if variant not in ("approx", "sample"):
        raise ValueError("variant must be 'approx' or 'sample'")
    if R == 0:
        if np.ptp(x) == 0:
            return 0.0
        raise ValueError("Gaussian kernel width must be positive")
    km, km1 = _templates(x, m, _cache).kernels(R)
    if variant == "approx":
        return float(max(np.mean(np.log(km.mean(axis=1))) - np.mean(np.log(km1.mean(axis=1))), 0.0))
    count = x.size - m
    return _sampen_from_counts(_pair_sum(km[:count, :count]), _pair_sum(km1))


# -- attractor geometry -----------------------------------------------------

def _pair_distances(pts: np.ndarray, theiler: int) -> np.ndarray:
    n = pts.shape[0]
    out = []
    for i in range(n - theiler - 1):
        diff = pts[i + theiler + 1 :] - pts[i]
        out.append(np.sqrt(np.einsum("ij,ij->i", diff, diff)))
    return np.concatenate(out) if out else np.empty(0)


@dataclass(frozen=True)
class CorrelationSum:
    eps: np.ndarray
    c: np.ndarray
    slope: float


def correlation_sum(s, params: EmbeddingParams, theiler: int = CD_THEILER, n_eps: int = CD_N_EPS) -> CorrelationSum:
    pts = embed(s, params)
    if pts.shape[0] < 100:
        raise NldError(f"correlation dimension needs >= 100 points, got {pts.shape[0]}")
    d = _pair_distances(pts, theiler)
    pos = d[d > 0]
    if pos.size == 0:
        raise NldError("degenerate attractor: all points identical")
    lo, hi = np.percentile(pos, [1.0, 50.0])
    if not hi > lo:
        raise NldError("degenerate pairwise distance distribution")
    eps = np.logspace(np.log10(lo), np.log10(hi), n_eps)
    d_sorted = np.sort(d)
    c = np.searchsorted(d_sorted, eps, side="left") / d.size
    fit = CD_FIT_BINS
    if np.any(c[fit] <= 0):
        raise NldError("empty correlation sum in the scaling region")
    slope = np.polyfit(np.log(eps[fit]), np.log(c[fit]), 1)[0]
    return CorrelationSum(eps, c, float(slope))


def correlation_dimension(s, params: EmbeddingParams, theiler: int = CD_THEILER) -> float:
    """Grassberger-Procaccia slope over the middle of 20 log-spaced radii.

    Capped at the embedding dimension: nested loops of a slowly growing
    orbit steepen the finite-range slope past ``m``.
    """
    return min(correlation_sum(s, params, theiler).slope, float(params.m))


def hurst_exponent(s, min_window: int = 8, n_windows: int = 16) -> float:
    """Rescaled-range slope over non-overlapping windows from 8 to n/2."""
    x = _as_array(s)
    n = x.size
    if n < 64:
        raise NldError("Hurst exponent needs at least 64 samples")
    sizes = np.unique(np.floor(np.logspace(np.log10(min_window), np.log10(n // 2), n_windows)).astype(int))
    logs_l, logs_rs = [], []
    for L in sizes:
        k = n // L
        w = x[: k * L].reshape(k, L)
        dev = w - w.mean(axis=1, keepdims=True)
        z = np.cumsum(dev, axis=1)
        R = z.max(axis=1) - z.min(axis=1)
        sd = w.std(axis=1)
        ok = sd > 0
        if ok.any():
            logs_l.append(np.log(L))
            logs_rs.append(np.log(np.mean(R[ok] / sd[ok])))
    if len(logs_l) < 2:
        raise NldError("constant series: zero variance in every window")
    return float(np.polyfit(logs_l, logs_rs, 1)[0])


def mean_period(s) -> float:
    """Reciprocal of the power-weighted mean frequency, in samples."""
    x = _as_array(s)
    p = np.abs(np.fft.rfft(x - x.mean())) ** 2
    f = np.fft.rfftfreq(x.size)
    p[0] = 0.0
    if p.sum() == 0:
        return 1.0
    return float(1.0 / (np.sum(f * p) / p.sum()))


@dataclass(frozen=True)
class Divergence:
    k: np.ndarray
    log_d: np.ndarray
    fit_end: int
    slope: float


def divergence_curve(s, params: EmbeddingParams, horizon: int = LLE_HORIZON, theiler: int | None = None) -> Divergence:
    """Rosenstein mean log divergence and its initial slope (per step).

    The fit runs from k = 0 to the first k at which the curve has covered
    70% of its total rise over the horizon (at least k = 2, at most
    ``horizon``), which tracks the linear region before saturation.
    """
    x = _as_array(s)
    pts = embed(x, params)
    n = pts.shape[0]
    if n < 200:
        raise NldError(f"Lyapunov exponent needs >= 200 points, got {n}")
    if theiler is None:
        theiler = int(math.ceil(mean_period(x)))
    nn, d0 = _nearest_neighbours(pts, exclude=theiler)
    valid = np.isfinite(d0)
    if not valid.any():
        raise NldError("no valid nearest neighbours outside the Theiler window")
    i_all = np.flatnonzero(valid)
    log_d = np.full(horizon + 1, np.nan)
    for k in range(horizon + 1):
        i = i_all[(i_all + k < n) & (nn[i_all] + k < n)]
        if i.size == 0:
            break
        dk = np.linalg.norm(pts[i + k] - pts[nn[i] + k], axis=1)
        dk = dk[dk > 0]
        if dk.size:
            log_d[k] = np.mean(np.log(dk))
    ks = np.flatnonzero(np.isfinite(log_d))
    if ks.size < 3:
        raise NldError("divergence curve too short to fit")
    y = log_d[ks]
    rise = y - y[0]
    total = np.nanmax(rise)
    end = ks[-1]
    if total > 0:
        hit = ks[rise >= 0.7 * total]
        end = int(hit[0]) if hit.size else end
    end = max(end, int(ks[min(2, ks.size - 1)]))
    sel = ks <= end
    slope = float(np.polyfit(ks[sel], y[sel], 1)[0])
    return Divergence(ks, y, end, slope)


def largest_lyapunov(s, params: EmbeddingParams, rate: float | None = None, horizon: int = LLE_HORIZON) -> float:
    """Rosenstein estimate; per second when ``rate`` is given, else per step."""
    slope = divergence_curve(s, params, horizon).slope
    return slope * rate if rate else slope


def lz76_phrase_count(bits) -> int:
    """Kaspar-Schuster count of LZ76 phrases."""
    s = list(bits)
    n = len(s)
    if n == 0:
        return 0
    if n == 1:
        return 1
    i, c, l, k, k_max = 0, 1, 1, 1, 1
    while True:
        if s[i + k - 1] == s[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            k_max = max(k_max, k)
            i += 1
            if i == l:
                c += 1
                l += k_max
                if l + 1 > n:
                    break
                i, k, k_max = 0, 1, 1
            else:
                k = 1
    return c


def lempel_ziv_complexity(s) -> float:
    """Normalised LZ76 complexity of the increment signs, clipped to [0, 1]."""
    x = _as_array(s)
    if x.size < 16:
        raise NldError("Lempel-Ziv complexity needs at least 16 samples")
    bits = (np.diff(x) > 0).astype(np.int8)
    n = bits.size
    c = lz76_phrase_count(bits.tolist())
    return float(min(1.0, c * math.log2(n) / n))


# -- feature vector ----------------------------------------------------------

@dataclass(frozen=True)
class NldFeatures:
    apen: float
    sampen: float
    gauss_apen: float
    gauss_sampen: float
    cd: float
    hurst: float
    lle: float
    lzc: float

    def to_vector(self, **meta) -> FeatureVector:
        names = tuple(f.name for f in fields(self))
        return FeatureVector(names, np.array(astuple(self), dtype=float), ("nld",) * len(names), meta)


def _finite_sampen(x: np.ndarray, m: int = 2, cache: _Templates | None = None) -> tuple[float, bool]:
    """SampEn with the no-match case replaced by its largest finite value."""
    res = sample_entropy_counts(x, m, _cache=cache)
    if res.undefined:
        count = x.size - m
        return math.log(count * (count - 1) / 2.0), True
    return res.value, False


def nld_features(rec: Recording, signal: np.ndarray | None = None) -> FeatureVector:
    """Eight NLD measures of the radial trajectory.

    Delay and dimension are estimated per recording and stored in
    ``meta`` (``tau``, ``m``) together with ``sampen_undefined``.
    """
    r = radial_trajectory(rec) if signal is None else Series(signal, rec.sample_rate)
    x = r.values
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tau = delay_mutual_information(x)
    m = max(2, embedding_dimension_fnn(x, tau))
    params = EmbeddingParams(m, tau)
    if params.rows(x.size) < 200:
        params = EmbeddingParams(m, max(1, (x.size - 200) // (m - 1)))
    _check_length(x, 2)
    tmpl = _Templates(x, 2)
    sampen, undefined = _finite_sampen(x, cache=tmpl)
    gs = gaussian_kernel_entropy(x, variant="sample", _cache=tmpl)
    feats = NldFeatures(
        apen=approximate_entropy(x, _cache=tmpl),
        sampen=sampen,
        gauss_apen=gaussian_kernel_entropy(x, variant="approx", _cache=tmpl),
        gauss_sampen=gs if math.isfinite(gs) else sampen,
        cd=correlation_dimension(x, params),
        hurst=hurst_exponent(x),
        lle=largest_lyapunov(x, params, rate=r.rate),
        lzc=lempel_ziv_complexity(x),
    )
    return feats.to_vector(m=params.m, tau=params.tau, sampen_undefined=undefined,
                           tau_capped=bool(caught))
