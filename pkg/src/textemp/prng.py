"""Portable deterministic pseudo-randomness.

Everything random in this package flows through one named scheme:
SplitMix64 in counter mode. A 64-bit key plus a counter produces the
i-th word of a stream as

    word(key, i) = mix64((key + (i + 1) * GAMMA) mod 2**64)

where ``mix64`` is the SplitMix64 finalizer and GAMMA its odd increment
constant. The scheme is pure 64-bit integer arithmetic, so streams and
derived seeds are reproducible bit-for-bit on any platform or language.
Normal variates are produced from stream words via Box-Muller; those go
through libm (log/cos/sin), which may differ in the last ulp across C
libraries, so golden tests compare at 1e-13 relative rather than exactly.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

_INV_2POW53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi


def mix64(x: int) -> int:
    """SplitMix64 finalizer: bijective avalanche mix of a 64-bit word."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def word(key: int, counter: int) -> int:
    """The counter-th 64-bit word of the stream identified by key."""
    return mix64((key + (counter + 1) * GAMMA) & MASK64)


def derive_key(base: int, *indices: int) -> int:
    """Derive a child stream key by absorbing integer indices in order.

    Used for per-text seeds in sweeps: the derived key depends only on
    (base, indices), never on evaluation order.
    """
    h = mix64(base & MASK64)
    for ix in indices:
        h = mix64((h + (ix + 1) * GAMMA) & MASK64)
    return h


def unit(w: int) -> float:
    """Map a 64-bit word to a double in [0, 1) using the top 53 bits."""
    return (w >> 11) * _INV_2POW53


def unit_open(w: int) -> float:
    """Map a 64-bit word to a double in (0, 1); safe as a log argument."""
    return ((w >> 11) + 0.5) * _INV_2POW53


def normals(key: int, n: int) -> list[float]:
    """n standard normal variates from the stream at key, via Box-Muller.

    Pair j consumes words 2j and 2j+1; the trailing variate of the last
    pair is dropped when n is odd, so the draw count is fixed by n alone.
    """
    out: list[float] = []
    for j in range((n + 1) // 2):
        u1 = unit_open(word(key, 2 * j))
        u2 = unit(word(key, 2 * j + 1))
        r = math.sqrt(-2.0 * math.log(u1))
        theta = _TWO_PI * u2
        out.append(r * math.cos(theta))
        out.append(r * math.sin(theta))
    return out[:n]


class Stream64:
    """Sequential uniform stream over the counter scheme.

    Each instance owns a private counter; instances with equal keys
    replay the same sequence.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int):
        self.key = key & MASK64
        self.counter = 0

    def next_word(self) -> int:
        w = word(self.key, self.counter)
        self.counter += 1
        return w

    def uniform(self) -> float:
        """One double in [0, 1); consumes exactly one stream word."""
        return unit(self.next_word())
