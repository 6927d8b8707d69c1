"""Portable deterministic random number generation.

The simulator promises bitwise-identical output for a given seed across
platforms and Python versions, so it cannot depend on ``random`` or numpy
generator internals. SplitMix64 is small enough to carry along, passes BigCrush,
and has published reference outputs to pin the implementation against.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import ConfigError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    """The SplitMix64 output finalizer."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sebastiano Vigna's SplitMix64 with convenience draws.

    All derived draws (uniform, randint, normal, choice) are defined purely in
    terms of ``next_u64`` and exact IEEE double arithmetic, so sequences are
    reproducible bit for bit from the seed alone.
    """

    __slots__ = ("_state", "_seed")

    def __init__(self, seed: int):
        if not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        self._seed = seed & _MASK64
        self._state = self._seed

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def substream(self, index: int) -> "SplitMix64":
        """An independent generator addressed by (seed, index).

        Children are a function of the parent's seed, not its current state,
        so substream layouts do not shift when extra draws are added upstream.
        """
        if not isinstance(index, int) or index < 0:
            raise ConfigError(f"substream index must be a non-negative integer, got {index!r}")
        return SplitMix64(_mix((self._seed ^ _mix((index + 1) * _GOLDEN & _MASK64)) & _MASK64))

    # ------------------------------------------------------------
    # Derived draws
    # ------------------------------------------------------------

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        """Uniform double in [low, high) from the top 53 bits."""
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return low + (high - low) * u

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high], inclusive, without modulo bias."""
        if high < low:
            raise ConfigError(f"empty integer range [{low}, {high}]")
        n = high - low + 1
        # rejection sampling on the truncated multiple of n
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return low + r % n

    def choice(self, items: Sequence):
        if not items:
            raise ConfigError("cannot choose from an empty sequence")
        return items[self.randint(0, len(items) - 1)]

    def choice_weighted(self, items: Sequence, weights: Sequence[float]):
        if not items or len(items) != len(weights):
            raise ConfigError("items and weights must be equal-length and non-empty")
        total = 0.0
        for w in weights:
            if not (math.isfinite(w) and w >= 0):
                raise ConfigError(f"weights must be finite and non-negative, got {w!r}")
            total += w
        if total <= 0:
            raise ConfigError("at least one weight must be positive")
        target = self.uniform(0.0, total)
        acc = 0.0
        for item, w in zip(items, weights):
            acc += w
            if target < acc:
                return item
        return items[-1]  # target == total is excluded, but guard rounding

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """One Box-Muller draw (two uniforms consumed per call)."""
        if sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {sigma!r}")
        # u1 in (0, 1] so the log is always finite
        u1 = ((self.next_u64() >> 11) + 1) * (1.0 / (1 << 53))
        u2 = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
