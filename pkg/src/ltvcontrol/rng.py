"""Deterministic 64-bit linear congruential generator.

The generator is spelled out here so that other implementations can
reproduce the exact same sample streams:

    state_{k+1} = (6364136223846793005 * state_k + 1442695040888963407) mod 2^64

Uniform doubles are formed from the top 53 bits, ``(state >> 11) * 2^-53``.
Standard normals come from the Box-Muller transform applied to consecutive
uniform pairs (the first uniform is shifted into (0, 1] to keep the log
finite); the spare normal is cached and consumed before advancing the state
again.
"""

from __future__ import annotations

import math

import numpy as np

_MULT = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    """Seeded linear generator with uniform, normal and unit-vector draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._spare: float | None = None

    def next_u64(self) -> int:
        self._state = (_MULT * self._state + _INC) & _MASK
        return self._state

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return z
        # shift u1 into (0, 1] so log(u1) is finite
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normals(self, count: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(count)])

    def unit_vector(self, dim: int) -> np.ndarray:
        """Random real unit vector, uniform on the sphere."""
        while True:
            v = self.normals(dim)
            norm = np.linalg.norm(v)
            if norm > 1e-12:
                return v / norm
