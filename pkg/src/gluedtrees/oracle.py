"""Black-box access to G_n' through opaque vertex names.

Two oracle flavours share one query interface:

* :class:`Oracle` wraps a fully built :class:`GluedTreesGraph` and a
  precomputed naming table (serialisable, used for audits and replay);
* :class:`LazyOracle` samples the middle cycle and the names on demand, so a
  fresh instance costs O(queries) instead of O(2**n).  Both the lazy cycle and
  the lazy naming are exactly uniform; only the order of random draws differs
  from the eager construction.

Responses list neighbour names in increasing numeric order so that nothing
about tree structure leaks through the ordering.  ``INVALID`` (``None``) is
returned for names that are not assigned to any vertex.
"""

from __future__ import annotations

import json

import numpy as np

from .graph import GluedTreesGraph, check_memory_budget, num_vertices, tree_links
from .rng import SplitMix64, derive_key, splitmix_array

INVALID = None
FORMAT_VERSION = 1


def name_bits(n: int) -> int:
    """Width of vertex names: 2n bits, widened so tiny instances still fit."""
    return max(2 * n, n + 3)


def all_ones(n: int) -> int:
    return (1 << name_bits(n)) - 1


def draw_names(name_seed: int, n: int) -> np.ndarray:
    """Distinct names for canonical ids ``0 .. V-1``.

    Walks stream outputs ``k = 0, 1, 2, ...`` of ``derive_key(name_seed)``,
    keeps the top ``name_bits(n)`` bits, and accepts a value unless it is the
    all-ones pattern or was accepted before.  The i-th accepted value names
    vertex ``i``.
    """
    bits = name_bits(n)
    count = num_vertices(n)
    reserved = np.uint64(all_ones(n))
    key = derive_key(name_seed)
    shift = np.uint64(64 - bits)
    got = np.empty(0, dtype=np.uint64)
    start = 0
    while got.size < count:
        batch = count - got.size + (count >> 3) + 64
        draws = splitmix_array(key, np.arange(start, start + batch, dtype=np.uint64)) >> shift
        start += batch
        cand = np.concatenate([got, draws[draws != reserved]])
        _, first = np.unique(cand, return_index=True)
        first.sort()
        got = cand[first][:count]
    return got


class Oracle:
    """Query-counting black box over an explicit graph and naming table."""

    def __init__(self, graph: GluedTreesGraph, names: np.ndarray, name_seed: int | None = None):
        names = np.asarray(names, dtype=np.uint64)
        if names.shape != (graph.num_vertices,):
            raise ValueError("need exactly one name per vertex")
        self.graph = graph
        self.name_seed = name_seed
        self.names = names
        self._order = np.argsort(names, kind="stable")
        self._sorted = names[self._order]
        if np.any(self._sorted[1:] == self._sorted[:-1]):
            raise ValueError("vertex names must be distinct")
        if np.any(names == np.uint64(all_ones(graph.n))):
            raise ValueError("the all-ones pattern is reserved")
        self.query_count = 0

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def entrance_name(self) -> int:
        return int(self.names[0])

    def name_of(self, vid: int) -> int:
        return int(self.names[vid])

    def vertex_of(self, name: int) -> int | None:
        if not 0 <= name < (1 << 64):
            return None
        key = np.uint64(name)
        i = int(np.searchsorted(self._sorted, key))
        if i < self._sorted.size and self._sorted[i] == key:
            return int(self._order[i])
        return None

    def query(self, name: int):
        self.query_count += 1
        vid = self.vertex_of(name)
        if vid is None:
            return INVALID
        return tuple(sorted(int(self.names[u]) for u in self.graph.neighbors(vid)))

    def to_json(self) -> str:
        width = (name_bits(self.n) + 3) // 4
        doc = {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "seed": self.graph.seed,
            "name_seed": self.name_seed,
            "middle_cycle": [int(x) for x in self.graph.middle_cycle()],
            "names": [f"{int(x):0{width}x}" for x in self.names],
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Oracle":
        doc = json.loads(text)
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
        n = int(doc["n"])
        graph = GluedTreesGraph.from_middle_cycle(n, doc["middle_cycle"], doc.get("seed"))
        names = np.array([int(h, 16) for h in doc["names"]], dtype=np.uint64)
        return cls(graph, names, doc.get("name_seed"))


def make_oracle(g: GluedTreesGraph, name_seed: int) -> Oracle:
    check_memory_budget(g.n)
    return Oracle(g, draw_names(name_seed, g.n), name_seed)


def oracle_query(o, name: int):
    return o.query(name)


class _LazyPermutation:
    """Uniform random permutation of ``range(size)`` revealed point by point."""

    def __init__(self, size: int, rng: SplitMix64):
        self.size = size
        self.rng = rng
        self.fwd: dict[int, int] = {}
        self.inv: dict[int, int] = {}

    def __getitem__(self, p: int) -> int:
        x = self.fwd.get(p)
        if x is None:
            while True:
                x = self.rng.randbelow(self.size)
                if x not in self.inv:
                    break
            self.fwd[p] = x
            self.inv[x] = p
        return x

    def index(self, x: int) -> int:
        p = self.inv.get(x)
        if p is None:
            while True:
                p = self.rng.randbelow(self.size)
                if p not in self.fwd:
                    break
            self.fwd[p] = x
            self.inv[x] = p
        return p


class LazyOracle:
    """Fresh random instance of G_n' whose randomness is sampled on demand.

    The middle cycle is the pair of leaf orders (left, right) revealed lazily;
    names are a uniform injection into the name space minus the all-ones
    pattern.  Querying an unseen name decides whether it is in use with the
    exact conditional probability, then binds it to a uniformly random
    unnamed vertex.
    """

    def __init__(self, n: int, seed: int, name_seed: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.seed = seed
        self.name_seed = name_seed
        self.total = num_vertices(n)
        self.bits = name_bits(n)
        self._space = (1 << self.bits) - 1
        m = 1 << n
        self._left = _LazyPermutation(m, SplitMix64(derive_key(seed, 11)))
        self._right = _LazyPermutation(m, SplitMix64(derive_key(seed, 12)))
        self._names_rng = SplitMix64(derive_key(name_seed, 13))
        self._name_of: dict[int, int] = {}
        self._vertex_of: dict[int, int] = {}
        self._unused: set[int] = set()
        self.query_count = 0
        self.entrance_name = self.name_of(0)

    def neighbors(self, vid: int) -> list[int]:
        links, side, i = tree_links(self.n, vid)
        if side:
            m = 1 << self.n
            first_leaf = m - 1
            if side < 0:
                p = self._left.index(i)
                right = (self._right[p], self._right[(p - 1) % m])
                links += [self.total - m - j for j in right]
            else:
                p = self._right.index(i)
                left = (self._left[p], self._left[(p + 1) % m])
                links += [first_leaf + j for j in left]
        return sorted(links)

    def name_of(self, vid: int) -> int:
        name = self._name_of.get(vid)
        if name is None:
            while True:
                name = self._names_rng.randbelow(self._space)
                if name not in self._vertex_of and name not in self._unused:
                    break
            self._bind(vid, name)
        return name

    def _bind(self, vid: int, name: int) -> None:
        self._name_of[vid] = name
        self._vertex_of[name] = vid

    def vertex_of(self, name: int) -> int | None:
        vid = self._vertex_of.get(name)
        if vid is not None:
            return vid
        if not 0 <= name < self._space or name in self._unused:
            return None
        free_vertices = self.total - len(self._name_of)
        free_names = self._space - len(self._vertex_of) - len(self._unused)
        if self._names_rng.randbelow(free_names) >= free_vertices:
            self._unused.add(name)
            return None
        while True:
            vid = self._names_rng.randbelow(self.total)
            if vid not in self._name_of:
                break
        self._bind(vid, name)
        return vid

    def query(self, name: int):
        self.query_count += 1
        vid = self.vertex_of(name)
        if vid is None:
            return INVALID
        return tuple(sorted(self.name_of(u) for u in self.neighbors(vid)))
