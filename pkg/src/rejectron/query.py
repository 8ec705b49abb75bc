"""Label-query rules and the seeded random source behind them."""

from dataclasses import dataclass

import numpy as np

from .losses import _sigmoid_bump

_MASK64 = (1 << 64) - 1


def splitmix64(x):
    """One round of the SplitMix64 output function on a 64-bit integer."""
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed, index):
    """Child seed ``splitmix64(base_seed + index)``, used per repetition/sub-stream."""
    return splitmix64((int(base_seed) + int(index)) & _MASK64)


class SeededRng:
    """PCG64 generator with a fixed 64-bit seed.

    numpy's PCG64 produces the same sequence on every platform, and drawing
    ``n`` doubles at once yields exactly the values ``n`` single draws would.
    """

    def __init__(self, seed):
        seed = int(seed)
        if not 0 <= seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform(self):
        return float(self._gen.random())

    def uniforms(self, n):
        return self._gen.random(n)

    def integers(self, high, size):
        return self._gen.integers(0, high, size=size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def normal(self, size):
        return self._gen.standard_normal(size)


@dataclass(frozen=True)
class QueryDecision:
    queried: bool
    probability: float

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability outside [0, 1]")
        if self.queried and self.probability <= 0.0:
            raise ValueError("cannot query with zero probability")


def dral_query(f_value, rho):
    """Deterministic band test ``rho - 1 <= |f| <= rho + 1`` (inclusive)."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    a = abs(f_value)
    return bool(rho - 1.0 <= a <= rho + 1.0)


def dsal_query_probability(f_value, rho, gamma):
    """``4 sigma(u) (1 - sigma(u))`` with ``u = |f| - rho``; equals 1 at ``|f| = rho``."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    p = 4.0 * _sigmoid_bump(np.abs(f_value) - rho, gamma)
    return p[()] if np.ndim(p) == 0 else p


def sample_query(p, rng):
    """Bernoulli(p) draw consuming exactly one uniform from ``rng``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"query probability must lie in [0, 1], got {p!r}")
    return rng.uniform() < p
