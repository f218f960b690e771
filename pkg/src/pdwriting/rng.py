"""Portable counter-based random streams (SplitMix64).

Every value depends only on ``(key, counter)``, so the same seed yields the
same stream in any language that implements the 64-bit SplitMix finaliser.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64(key: int, counters: np.ndarray) -> np.ndarray:
    """Return ``mix(key + (c + 1) * golden)`` for each counter ``c``."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(key & _MASK) + (c + np.uint64(1)) * _GOLDEN
    return _mix(state)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    return h


def derive_seed(seed: int, name: str) -> int:
    """Fixed hash of ``(seed, name)`` used to split one seed into components."""
    key = (int(seed) & _MASK) ^ fnv1a64(name)
    return int(splitmix64(key, np.zeros(1, dtype=np.uint64))[0])


class Stream:
    """Sequential view over one SplitMix64 key.

    Draws advance an internal counter, so interleaving calls is
    deterministic but order-dependent.
    """

    def __init__(self, seed: int, name: str = ""):
        self.key = derive_seed(seed, name) if name else int(seed) & _MASK
        self.counter = 0

    def _raw(self, n: int) -> np.ndarray:
        out = splitmix64(self.key, np.arange(self.counter, self.counter + n, dtype=np.uint64))
        self.counter += n
        return out

    def uniform(self, n: int) -> np.ndarray:
        """Uniform doubles in [0, 1) from the top 53 bits."""
        return (self._raw(n) >> np.uint64(11)).astype(np.float64) * (2.0**-53)

    def normal(self, n: int) -> np.ndarray:
        """Standard normals by Box-Muller, consuming two uniforms per value."""
        u = self.uniform(2 * n)
        u1 = 1.0 - u[0::2]  # in (0, 1]
        u2 = u[1::2]
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def child(self, name: str) -> "Stream":
        return Stream(self.key, name)
