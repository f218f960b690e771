"""Amplitude-modulated sinusoid model of the spiral trajectory.

The mean-removed radial trajectory is modelled as

    r_hat(t) = (a3 t^3 + a2 t^2 + a1 t + a0) * sin(2 pi f t)

with ``f`` taken from the DFT and the cubic envelope fitted by least squares
to the trajectory's maxima. Twelve features come out of the fit: the MSE,
the four coefficients, five spectral amplitudes and two spectral slopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal.windows import blackmanharris

from .features import FeatureVector
from .ingest import Recording, Task
from .kinematics import Series, radial_trajectory

GEOMETRIC_NAMES = (
    "mse", "a0", "a1", "a2", "a3",
    "A1", "A2", "A3", "A4", "A5",
    "slope_13", "slope_35",
)
SMOOTH_WIDTH = 5
SPECTRAL_FLOOR = 4e-5
PEAK_SPACING = 0.75  # periods
OFFSET_ROUNDS = 3


class ModelFitError(ValueError):
    pass


class SpectralError(ValueError):
    pass


class UnsupportedTaskError(ValueError):
    pass


@dataclass(frozen=True)
class SpiralModel:
    coefficients: np.ndarray  # a0..a3
    f: float
    modeled: Series
    mse: float
    offset: float
    peaks: np.ndarray

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.tolist(),
            "f": self.f,
            "mse": self.mse,
            "offset": self.offset,
            "peaks": self.peaks.tolist(),
        }


@dataclass(frozen=True)
class SpectralProfile:
    component_freqs: np.ndarray
    component_amps: np.ndarray
    slope_13: float
    slope_35: float


def _values(r) -> tuple[np.ndarray, float | None]:
    if isinstance(r, Series):
        return r.values, r.rate
    return np.asarray(r, dtype=np.float64), None


def moving_average(x: np.ndarray, width: int = SMOOTH_WIDTH) -> np.ndarray:
    """Centred moving average; the window shrinks at the edges."""
    kernel = np.ones(width)
    num = np.convolve(x, kernel, mode="same")
    den = np.convolve(np.ones_like(x), kernel, mode="same")
    return num / den


def _local_maxima(x: np.ndarray) -> np.ndarray:
    """First index of every strict local maximum, plateaus included."""
    n = x.size
    out = []
    i = 1
    while i < n - 1:
        if x[i - 1] < x[i]:
            j = i
            while j + 1 < n and x[j + 1] == x[i]:
                j += 1
            if j + 1 < n and x[j + 1] < x[i]:
                out.append(i)
            i = j + 1
        else:
            i += 1
    return np.array(out, dtype=int)


def detect_peaks(r, min_distance: int | None = None, smooth: int = SMOOTH_WIDTH) -> np.ndarray:
    """Local maxima located on the smoothed series, reported on the raw one.

    With ``min_distance`` set, peaks closer than that are suppressed in
    favour of the higher one.
    """
    x, _ = _values(r)
    if x.size < 3:
        raise ValueError("peak detection needs at least 3 samples")
    s = moving_average(x, smooth) if smooth > 1 else x
    half = smooth // 2
    raw = []
    for i in _local_maxima(s):
        lo, hi = max(0, i - half), min(x.size, i + half + 1)
        raw.append(lo + int(np.argmax(x[lo:hi])))
    peaks = np.unique(np.array(raw, dtype=int))
    if min_distance and peaks.size > 1:
        keep: list[int] = []
        for i in peaks[np.argsort(-x[peaks], kind="stable")]:
            if all(abs(i - k) >= min_distance for k in keep):
                keep.append(int(i))
        peaks = np.array(sorted(keep), dtype=int)
    return peaks


def fundamental_frequency(r: Series) -> float:
    """Frequency of the largest non-DC bin of the mean-removed DFT."""
    if len(r) < 32:
        raise ValueError("fundamental frequency needs at least 32 samples")
    x = r.values - r.values.mean()
    mag = np.abs(np.fft.rfft(x))
    mag[0] = 0.0
    peak = mag.max()
    if not peak > 1e-12 * max(np.abs(r.values).max(), 1.0) * x.size:
        raise ModelFitError("constant series has no spectral content")
    k = int(np.argmax(mag))
    return k * r.rate / x.size


def fit_amplitude_polynomial(times, values, degree: int = 3) -> np.ndarray:
    """Least-squares polynomial coefficients in ascending order (a0, a1, ...)."""
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.size < degree + 1:
        raise ModelFitError(f"need at least {degree + 1} peaks, got {t.size}")
    A = np.vander(t, degree + 1, increasing=True)
    # column scaling keeps t^3 and t^0 comparable before solving
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    if np.linalg.matrix_rank(As) < degree + 1:
        raise ModelFitError("rank-deficient peak set")
    coef, *_ = np.linalg.lstsq(As, v, rcond=None)
    return coef / scale


def polyval(coefficients, t) -> np.ndarray:
    return np.polynomial.polynomial.polyval(np.asarray(t, dtype=np.float64), coefficients)


def _fit_centred(r: Series, f: float, offset: float):
    centred = r.values - offset
    # one maximum per period: jitter bumps near the troughs sit half a period
    # from the true crests and would otherwise survive suppression
    peaks = detect_peaks(centred, min_distance=max(1, int(round(PEAK_SPACING * r.rate / f))))
    peaks = peaks[centred[peaks] > 0]
    if peaks.size < 4:
        raise ModelFitError(f"need at least 4 peaks, got {peaks.size}")
    t = r.times
    coef = fit_amplitude_polynomial(t[peaks], centred[peaks])
    return coef, polyval(coef, t) * np.sin(2 * np.pi * f * t), peaks


def fit_spiral_model(r: Series) -> SpiralModel:
    """Fit the amplitude-modulated sinusoid to ``r`` about a constant offset.

    The offset starts at the mean and is then re-estimated as the mean
    residual of the model; the sample mean alone is biased whenever the
    amplitude grows over the window.
    """
    f = fundamental_frequency(r)
    offset = float(r.values.mean())
    for _ in range(OFFSET_ROUNDS):
        coef, modeled, peaks = _fit_centred(r, f, offset)
        offset = float(np.mean(r.values - modeled))
    coef, modeled, peaks = _fit_centred(r, f, offset)
    mse = float(np.mean((r.values - offset - modeled) ** 2))
    return SpiralModel(coef, f, Series(modeled, r.rate), mse, offset, peaks)


def _padded_length(n: int) -> int:
    return 1 << int(np.ceil(np.log2(4 * n)))


def magnitude_spectrum(r: Series) -> tuple[np.ndarray, np.ndarray]:
    """Blackman-Harris windowed, zero-padded magnitude spectrum.

    Magnitudes are rescaled by ``n / sum(window)`` so an on-bin sine of
    amplitude A peaks near ``A * n / 2``, the unwindowed DFT convention.
    """
    x = r.values - r.values.mean()
    n = x.size
    w = blackmanharris(n, sym=False)
    nfft = _padded_length(n)
    mag = np.abs(np.fft.rfft(x * w, nfft)) * (n / w.sum())
    freqs = np.fft.rfftfreq(nfft, d=1.0 / r.rate)
    return freqs, mag


def spectral_profile(r: Series, n_components: int = 5, floor: float = SPECTRAL_FLOOR) -> SpectralProfile:
    """Five largest non-DC spectral maxima, in ascending frequency.

    Maxima below ``floor`` times the strongest one are treated as leakage
    and ignored.
    """
    freqs, mag = magnitude_spectrum(r)
    idx = _local_maxima(mag)
    idx = idx[idx > 0]
    if idx.size:
        idx = idx[mag[idx] >= floor * mag[idx].max()]
    if idx.size < n_components:
        raise SpectralError(
            f"only {idx.size} spectral components above {floor:g} of the maximum; "
            "lengthen the recording or lower the floor (spectrum is already zero-padded 4x)"
        )
    top = idx[np.argsort(-mag[idx], kind="stable")[:n_components]]
    top = np.sort(top)
    fq, amp = freqs[top], mag[top]
    return SpectralProfile(
        fq, amp,
        float((amp[2] - amp[0]) / (fq[2] - fq[0])),
        float((amp[4] - amp[2]) / (fq[4] - fq[2])),
    )


def geometric_features(rec: Recording) -> FeatureVector:
    if rec.task is not Task.SPIRAL:
        raise UnsupportedTaskError("geometric features are defined for the spiral task only")
    r = radial_trajectory(rec)
    model = fit_spiral_model(r)
    prof = spectral_profile(r)
    values = np.concatenate([[model.mse], model.coefficients, prof.component_amps, [prof.slope_13, prof.slope_35]])
    return FeatureVector(GEOMETRIC_NAMES, values, ("geometry",) * len(GEOMETRIC_NAMES),
                         {"f": model.f, "peaks": model.peaks.size})
