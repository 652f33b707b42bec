"""Seeded random streams for reproducible experiments.

Bits come from the Philox4x64 counter-based generator (``numpy.random.Philox``),
whose raw 64-bit output sequence is stable across numpy releases. Everything
derived from those bits is defined here rather than delegated to
``numpy.random.Generator``, whose sampling algorithms may change:

* uniform doubles in the open interval (0, 1): ``((u >> 11) + 0.5) * 2**-53``
* standard normals: Box-Muller on consecutive uniform pairs, cosine branch
  first, then sine branch
* bounded integers: multiply-shift ``(u * m) >> 64``
* sampling without replacement: partial Fisher-Yates

Each consumer gets its own stream keyed by ``(seed, purpose)``, so e.g. the
fault plan does not shift when the encoding dimension changes.
"""
from __future__ import annotations

import zlib

import numpy as np

__all__ = ["RandomStream", "stream"]

_TWO_PI = 2.0 * np.pi
_INV_2_53 = 2.0 ** -53


class RandomStream:
    def __init__(self, seed: int, purpose: str = ""):
        if seed < 0:
            raise ValueError(f"seed must be nonnegative, got {seed}")
        self.seed = int(seed)
        self.purpose = purpose
        tag = zlib.crc32(purpose.encode("utf-8"))
        ss = np.random.SeedSequence([self.seed, tag])
        self._bitgen = np.random.Philox(ss)

    def raw(self, size: int) -> np.ndarray:
        if size == 0:
            return np.empty(0, dtype=np.uint64)
        return np.asarray(self._bitgen.random_raw(size), dtype=np.uint64)

    def uniform(self, size: int) -> np.ndarray:
        """Doubles strictly inside (0, 1)."""
        bits = self.raw(size) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * _INV_2_53

    def normal(self, size: int) -> np.ndarray:
        n_pairs = (size + 1) // 2
        u = self.uniform(2 * n_pairs)
        u1, u2 = u[0::2], u[1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        out = np.empty(2 * n_pairs)
        out[0::2] = radius * np.cos(_TWO_PI * u2)
        out[1::2] = radius * np.sin(_TWO_PI * u2)
        return out[:size]

    def integer_below(self, m: int) -> int:
        if m <= 0:
            raise ValueError("m must be positive")
        return (int(self.raw(1)[0]) * m) >> 64

    def integer_in(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        return lo + self.integer_below(hi - lo + 1)

    def sample(self, population: int, count: int) -> list[int]:
        """``count`` distinct values from ``range(population)``, in draw order."""
        if not 0 <= count <= population:
            raise ValueError(f"cannot draw {count} from {population}")
        pool = list(range(population))
        for i in range(count):
            j = i + self.integer_below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:count]


def stream(seed: int, purpose: str) -> RandomStream:
    return RandomStream(seed, purpose)
