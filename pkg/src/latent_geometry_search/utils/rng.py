import math
from typing import List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """
    SplitMix64 generator (Steele, Lea & Flood). Every seeded draw in the package
    comes from here so shuffles, initial designs and frozen weights are identical
    across platforms and numpy versions.

    state += 0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)
    """

    def __init__(self, seed: int = 0):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform_array(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        values = np.array([self.uniform() for _ in range(n)], dtype=np.float64)
        return low + (high - low) * values

    def normal(self) -> float:
        """Standard normal draw (Box-Muller, cosine branch only)."""
        u1 = self.uniform()
        u2 = self.uniform()
        # 1 - u1 lies in (0, 1], so the log is finite
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def normal_array(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)], dtype=np.float64)

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError(f"randbelow needs a positive bound, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        order = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            order[i], order[j] = order[j], order[i]
        return order

    def sample(self, population: Sequence[T], k: int) -> List[T]:
        """k distinct elements, in draw order."""
        if k > len(population):
            raise ValueError(f"Cannot sample {k} items from a population of {len(population)}")
        pool = list(population)
        chosen = []
        for _ in range(k):
            j = self.randbelow(len(pool))
            chosen.append(pool.pop(j))
        return chosen
