"""Seeded, reproducible random number generation.

All randomness in the package flows through :class:`SeededRng`, a thin wrapper
around numpy's PCG64 generator. PCG64 is fully specified by its seed, so two
generators built from the same seed emit identical streams on every platform.
"""

from __future__ import annotations

import numpy as np


class SeededRng:
    """Deterministic pseudorandom source backed by numpy's PCG64.

    The same seed always reproduces the same scalar stream; independent
    sub-streams for unrelated concerns are obtained with :meth:`spawn`.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def normal(self, shape=(), scale: float = 1.0) -> np.ndarray:
        return self._gen.normal(0.0, scale, size=shape)

    def uniform(self, shape=(), low: float = 0.0, high: float = 1.0) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def integers(self, low: int, high: int, shape=()) -> np.ndarray:
        return self._gen.integers(low, high, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        return self._gen.choice(n, size=size, replace=replace)

    def spawn(self, key: int) -> "SeededRng":
        """Derive an independent generator keyed off this seed."""
        return SeededRng(self.seed * 0x9E3779B97F4A7C15 + key + 1)
