"""Rooted query trees for the embedding game."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .rng import SplitMix64, derive_key

SHAPES = ("path", "caterpillar", "random_attach", "full_binary")


@dataclass(frozen=True)
class RootedTree:
    """Tree on nodes ``0..t-1`` rooted at 0, with ``parent[i] < i``.

    ``parent[0]`` is ``-1``.
    """

    parent: tuple[int, ...]

    def __post_init__(self):
        par = tuple(int(p) for p in self.parent)
        if not par:
            raise ValueError("a tree needs at least one node")
        if par[0] != -1:
            raise ValueError("node 0 must be the root (parent -1)")
        for i, p in enumerate(par[1:], start=1):
            if not 0 <= p < i:
                raise ValueError(f"parent[{i}] = {p} must lie in [0, {i})")
        object.__setattr__(self, "parent", par)

    @property
    def t(self) -> int:
        return len(self.parent)

    def __len__(self) -> int:
        return len(self.parent)

    def grandparent(self, i: int) -> int:
        p = self.parent[i]
        return -1 if p <= 0 else self.parent[p]

    def depths(self) -> list[int]:
        d = [0] * self.t
        for i in range(1, self.t):
            d[i] = d[self.parent[i]] + 1
        return d

    def ancestors(self, i: int) -> list[int]:
        out = []
        while i > 0:
            i = self.parent[i]
            out.append(i)
        return out

    def to_json(self) -> str:
        return json.dumps([None] + list(self.parent[1:]))

    @classmethod
    def from_json(cls, text: str) -> "RootedTree":
        raw = json.loads(text)
        return cls(tuple(-1 if p is None else p for p in raw))


def make_tree(shape: str, t: int, seed: int = 0) -> RootedTree:
    """Generate a tree of ``t`` nodes.

    ``caterpillar`` is a spine ``0 - 1 - 3 - 5 - ...`` where every even node
    ``i >= 2`` hangs off spine node ``i - 1``.  ``random_attach`` picks each
    parent uniformly among earlier nodes.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if shape == "path":
        parent = [i - 1 for i in range(t)]
    elif shape == "full_binary":
        parent = [-1] + [(i - 1) // 2 for i in range(1, t)]
    elif shape == "caterpillar":
        parent = [-1] + [0 if i == 1 else (i - 2 if i % 2 else i - 1) for i in range(1, t)]
    elif shape == "random_attach":
        rng = SplitMix64(derive_key(seed, 0x7472))
        parent = [-1] + [rng.randbelow(i) for i in range(1, t)]
    else:
        raise ValueError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    return RootedTree(tuple(parent))


def read_corpus(lines: Iterable[str]) -> list[RootedTree]:
    return [RootedTree.from_json(line) for line in lines if line.strip()]


def write_corpus(trees: Iterable[RootedTree]) -> str:
    return "".join(tree.to_json() + "\n" for tree in trees)
