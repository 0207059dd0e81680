"""Rebalancing gate: exact (always) or relaxed (probability p = 1/c).

The random source is splitmix64 over a single 64-bit state cell, implemented
identically here and inside the jitted kernels; a structure and its batched
benchmark loop share one state array, so gate decisions are reproducible for
a given seed no matter which path drives the operations.
"""

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(state):
    """Advance a 64-bit splitmix state; returns (new_state, draw)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class RebalancePolicy:
    """Immutable gate configuration plus one mutable rng stream."""

    __slots__ = ("_p", "_seed", "state")

    def __init__(self, p=1.0, seed=0):
        if not (0.0 < p <= 1.0):
            raise ValueError("p must be in (0, 1]")
        self._p = float(p)
        self._seed = int(seed) & _MASK
        self.state = np.array([self._seed], dtype=np.uint64)

    @classmethod
    def exact(cls):
        return cls(1.0)

    @classmethod
    def relaxed(cls, p, seed=0):
        return cls(p, seed)

    @classmethod
    def relaxed_c(cls, c, seed=0):
        if c < 1:
            raise ValueError("c must be >= 1")
        return cls(1.0 / c, seed)

    @property
    def p(self):
        return self._p

    @property
    def seed(self):
        return self._seed

    @property
    def mode(self):
        return "exact" if self._p >= 1.0 else "relaxed"

    def should_rebalance(self):
        """True with probability p; exact mode consumes no randomness."""
        if self._p >= 1.0:
            return True
        s, z = splitmix64(int(self.state[0]))
        self.state[0] = s
        return (z >> 11) * (2.0 ** -53) < self._p

    def stream(self, index):
        """Derived policy for worker `index` (same p, independent stream)."""
        s, z = splitmix64((self._seed + index + 1) & _MASK)
        _, z = splitmix64(z)
        return RebalancePolicy(self._p, z)

    def clone(self):
        return RebalancePolicy(self._p, self._seed)

    def __repr__(self):
        return "RebalancePolicy(p=%g, seed=%d)" % (self._p, self._seed)
