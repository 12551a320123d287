"""Seeded random stream with O(1) state capture.

Rewindable runs snapshot the random-stream state on every simulation step,
so the state has to be tiny and free to read. The Mersenne Twister behind
``random.Random`` carries ~2.5 kwords of state (several microseconds and
~20 kB per capture), which rules it out here. This splitmix64 stream keeps
one 64-bit word: capturing it is an attribute read.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


class RandomStream:
    """splitmix64 generator; state is a single int, stable across platforms."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        z ^= z >> 31
        return (z >> 11) * _INV_2_53

    def randrange(self, n: int) -> int:
        """Uniform int in [0, n) for small n."""
        return int(self.random() * n)

    def getstate(self) -> int:
        return self.state

    def setstate(self, state: int) -> None:
        self.state = state & _MASK
