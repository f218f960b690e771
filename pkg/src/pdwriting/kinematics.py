"""Kinematic features: eight signals summarised by six functionals each."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureVector
from .ingest import Recording

SIGNALS = ("r", "speed", "accel", "pressure", "dpressure", "ddpressure", "z", "dz")
FUNCTIONALS = ("mean", "std", "max", "min", "skew", "kurt")
KINEMATIC_NAMES = tuple(f"{s}_{f}" for s in SIGNALS for f in FUNCTIONALS)


@dataclass(frozen=True)
class Series:
    values: np.ndarray
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64).reshape(-1))
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) / self.rate


def radial_trajectory(rec: Recording) -> Series:
    return Series(np.hypot(rec.x, rec.y), rec.sample_rate)


def derivative(s: Series) -> Series:
    """Forward difference scaled by the sample rate; one sample shorter."""
    if len(s) < 2:
        raise ValueError("derivative needs at least 2 samples")
    return Series(np.diff(s.values) * s.rate, s.rate)


def functionals(values) -> np.ndarray:
    """(mean, std, max, min, skewness, excess kurtosis).

    ``std`` uses the n-1 denominator. Skewness is the adjusted Fisher-Pearson
    coefficient G1 and kurtosis the bias-corrected excess G2 (both need
    n >= 3 and n >= 4 respectively, else 0). A constant series gives zero
    skewness and kurtosis.
    """
    x = np.asarray(values.values if isinstance(values, Series) else values, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValueError("functionals need at least 2 samples")
    mean = x.mean()
    d = x - mean
    m2 = np.mean(d * d)
    std = np.sqrt(np.sum(d * d) / (n - 1))
    skew = kurt = 0.0
    # relative threshold so float round-off on a constant series counts as constant
    if m2 > (np.finfo(float).eps * max(abs(mean), 1.0)) ** 2 * 16:
        m3 = np.mean(d**3)
        m4 = np.mean(d**4)
        g1 = m3 / m2**1.5
        g2 = m4 / m2**2 - 3.0
        if n >= 3:
            skew = np.sqrt(n * (n - 1)) / (n - 2) * g1
        if n >= 4:
            kurt = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0)
    return np.array([mean, std, x.max(), x.min(), skew, kurt])


def kinematic_signals(rec: Recording) -> dict[str, Series]:
    rate = rec.sample_rate
    r = radial_trajectory(rec)
    speed = derivative(r)
    p = Series(rec.pressure, rate)
    dp = derivative(p)
    z = Series(rec.z, rate)
    return {
        "r": r,
        "speed": speed,
        "accel": derivative(speed),
        "pressure": p,
        "dpressure": dp,
        "ddpressure": derivative(dp),
        "z": z,
        "dz": derivative(z),
    }


def kinematic_features(rec: Recording) -> FeatureVector:
    """48 values ordered signal-major, functional-minor (see KINEMATIC_NAMES)."""
    if len(rec) < 4:
        raise ValueError("kinematic features need at least 4 samples")
    sig = kinematic_signals(rec)
    values = np.concatenate([functionals(sig[name]) for name in SIGNALS])
    return FeatureVector(KINEMATIC_NAMES, values, ("kinematics",) * len(KINEMATIC_NAMES))
