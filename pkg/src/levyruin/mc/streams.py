"""Counter-based per-replication random streams.

Each replication owns a Philox stream keyed by (campaign seed, replication index),
so results are reproducible and independent of worker scheduling.  Antithetic
members reuse the partner's key and flip every uniform to 1 - u at refill time
(normals become exact negations through the inverse-CDF transform).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

_BUF = 512
_MASK = (1 << 64) - 1


class Stream:
    __slots__ = ("_rng", "_u", "_ui", "_n", "_ni", "_anti")

    def __init__(self, seed: int, index: int, antithetic: bool = False):
        self._rng = np.random.Generator(np.random.Philox(key=[seed & _MASK, index & _MASK]))
        self._anti = antithetic
        self._u = self._draw()
        self._ui = 0
        self._n = None
        self._ni = 0

    def _draw(self) -> np.ndarray:
        u = self._rng.random(_BUF)
        if self._anti:
            u = 1.0 - u
        return np.clip(u, 1e-16, 1.0 - 1e-16)

    def uniform(self) -> float:
        i = self._ui
        if i >= _BUF:
            self._u = self._draw()
            i = 0
        self._ui = i + 1
        return self._u[i]

    def exponential(self, rate: float) -> float:
        return -math.log1p(-self.uniform()) / rate

    def normal(self) -> float:
        i = self._ni
        if self._n is None or i >= _BUF:
            self._n = ndtri(self._draw())
            i = 0
        self._ni = i + 1
        return self._n[i]

    def inverse_gaussian(self, mean: float, shape: float) -> float:
        # Michael-Schucany-Haas; exact first-passage times of drifted Brownian motion
        nu = self.normal()
        y = nu * nu
        x = (
            mean
            + mean * mean * y / (2.0 * shape)
            - (mean / (2.0 * shape)) * math.sqrt(4.0 * mean * shape * y + (mean * y) ** 2)
        )
        if x <= 0.0:  # roundoff guard for tiny means
            x = mean * mean * 0.25 / shape if shape > 0 else mean
        if self.uniform() <= mean / (mean + x):
            return x
        return mean * mean / x
