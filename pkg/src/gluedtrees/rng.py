"""Counter-based SplitMix64 streams.

Every random quantity in the package is a pure function of a 64-bit key and
an integer counter, so results do not depend on execution order or on how
trials are split across workers.

Constants (fixed, part of the reproducibility contract):

* ``GOLDEN = 0x9E3779B97F4A7C15``
* mixer: ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2**64)
* output ``k`` (0-based) of the stream with key ``s`` is ``mix(s + (k+1)*GOLDEN)``
* ``derive_key(m, i1, i2, ...)`` folds ``k = mix(m)`` then
  ``k = mix(k ^ mix(i + GOLDEN))`` for each index ``i``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_key(master: int, *indices: int) -> int:
    """Fold a master seed and a path of indices into a stream key."""
    k = mix64(master)
    for i in indices:
        k = mix64(k ^ mix64((i + GOLDEN) & MASK64))
    return k


def splitmix_at(key: int, counter: int) -> int:
    return mix64(key + (counter + 1) * GOLDEN)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_keys(key: int, indices: np.ndarray) -> np.ndarray:
    """Vectorised ``derive_key`` with one extra index level per element."""
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        inner = mix64_array(idx + np.uint64(GOLDEN))
    return mix64_array(np.uint64(key) ^ inner)


def splitmix_array(keys, counter) -> np.ndarray:
    """Output number ``counter`` of each stream in ``keys`` (broadcasting)."""
    keys = np.asarray(keys, dtype=np.uint64)
    counter = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_array(keys + (counter + np.uint64(1)) * np.uint64(GOLDEN))


class SplitMix64:
    """Sequential view of one counter-based stream."""

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def from_seed(cls, master: int, *indices: int) -> "SplitMix64":
        return cls(derive_key(master, *indices))

    def next_u64(self) -> int:
        out = splitmix_at(self.key, self.counter)
        self.counter += 1
        return out

    def randbelow(self, k: int) -> int:
        """Uniform integer in ``[0, k)`` by rejection (no modulo bias)."""
        if k <= 0:
            raise ValueError("k must be positive")
        if k == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % k

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def spawn(self, *indices: int) -> "SplitMix64":
        return SplitMix64(derive_key(self.key, *indices))
