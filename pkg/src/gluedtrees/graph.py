"""Random glued-trees instances G_n'.

Two complete binary trees of height ``n`` are glued at their leaves by a
cycle that alternates between left leaves (level ``n``) and right leaves
(level ``n+1``).  ENTRANCE is the left root (level 0), EXIT the right root
(level ``2n+1``).

Vertices are addressed by a canonical integer id, ordered by (level, index):

* left tree, level ``l <= n``: ``id = 2**l - 1 + index`` (heap order, so the
  tree parent of ``id`` is ``(id - 1) // 2``);
* right tree: the heap index ``r = V - 1 - id`` plays the same role, with the
  EXIT at ``r = 0``.  Within a right level, canonical indices therefore run
  opposite to heap order.

Only the two leaf permutations that define the middle cycle are stored; tree
edges are arithmetic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ResourceBudgetError
from .rng import derive_key, splitmix_array

DEFAULT_MAX_MEM_MB = 2048
# graph permutations + neighbour tables + naming tables, per vertex
_BYTES_PER_VERTEX = 48


class Vertex(NamedTuple):
    level: int
    index: int


def num_vertices(n: int) -> int:
    return (1 << (n + 2)) - 2


def width(n: int, level: int) -> int:
    if not 0 <= level <= 2 * n + 1:
        raise ValueError(f"level {level} outside [0, {2 * n + 1}]")
    return 1 << min(level, 2 * n + 1 - level)


def vertex_id(n: int, v: Vertex) -> int:
    level, index = v
    w = width(n, level)
    if not 0 <= index < w:
        raise ValueError(f"index {index} outside [0, {w}) at level {level}")
    if level <= n:
        return (1 << level) - 1 + index
    depth = 2 * n + 1 - level
    return num_vertices(n) - (1 << (depth + 1)) + 1 + index


def vertex_at(n: int, vid: int) -> Vertex:
    total = num_vertices(n)
    if not 0 <= vid < total:
        raise ValueError(f"vertex id {vid} outside [0, {total})")
    half = (1 << (n + 1)) - 1
    if vid < half:
        level = (vid + 1).bit_length() - 1
        return Vertex(level, vid - (1 << level) + 1)
    depth = (total - vid).bit_length() - 1
    level = 2 * n + 1 - depth
    return Vertex(level, vid - (total - (1 << (depth + 1)) + 1))


def level_ids(n: int, vids: np.ndarray) -> np.ndarray:
    """Vectorised level of canonical ids."""
    vids = np.asarray(vids, dtype=np.int64)
    total = num_vertices(n)
    half = (1 << (n + 1)) - 1
    left = vids < half
    heap = np.where(left, vids, total - 1 - vids)
    _, exp = np.frexp((heap + 1).astype(np.float64))
    depth = exp.astype(np.int64) - 1
    return np.where(left, depth, 2 * n + 1 - depth)


def tree_links(n: int, vid: int) -> tuple[list[int], int, int]:
    """Tree neighbours of ``vid`` plus its leaf status.

    Returns ``(tree_neighbors, side, leaf_index)`` where ``side`` is ``-1``
    for a left leaf, ``+1`` for a right leaf and ``0`` for an inner vertex.
    """
    total = num_vertices(n)
    half = (1 << (n + 1)) - 1
    left = vid < half
    heap = vid if left else total - 1 - vid
    depth = (heap + 1).bit_length() - 1

    def to_id(h):
        return h if left else total - 1 - h

    links = [] if heap == 0 else [to_id((heap - 1) // 2)]
    if depth < n:
        links += [to_id(2 * heap + 1), to_id(2 * heap + 2)]
        return links, 0, -1
    return links, (-1 if left else 1), heap - ((1 << n) - 1)


def max_mem_mb() -> float:
    raw = os.environ.get("GLUEDTREES_MAX_MEM_MB")
    return float(raw) if raw else float(DEFAULT_MAX_MEM_MB)


def estimated_bytes(n: int) -> int:
    return _BYTES_PER_VERTEX * num_vertices(n)


def check_memory_budget(n: int) -> None:
    need = estimated_bytes(n)
    budget = max_mem_mb() * (1 << 20)
    if need > budget:
        raise ResourceBudgetError(
            f"n={n} needs ~{need / (1 << 20):.0f} MB, over the "
            f"{budget / (1 << 20):.0f} MB budget (GLUEDTREES_MAX_MEM_MB)"
        )


def random_permutation(key: int, size: int) -> np.ndarray:
    """Uniform permutation: stable argsort of ``size`` stream outputs."""
    draws = splitmix_array(key, np.arange(size, dtype=np.uint64))
    return np.argsort(draws, kind="stable").astype(np.int64)


@dataclass(frozen=True, eq=False)
class GluedTreesGraph:
    """One instance of G_n'.

    ``left_order[p]`` and ``right_order[p]`` are the left and right leaf
    indices at position ``p`` of the middle cycle, which visits
    ``L[left_order[0]], R[right_order[0]], L[left_order[1]], ...`` and closes
    back to ``L[left_order[0]]``.
    """

    n: int
    seed: int | None
    left_order: np.ndarray = field(repr=False)
    right_order: np.ndarray = field(repr=False)
    left_cycle: np.ndarray = field(init=False, repr=False)
    right_cycle: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = 1 << self.n
        tau = np.asarray(self.left_order, dtype=np.int64)
        sigma = np.asarray(self.right_order, dtype=np.int64)
        if tau.shape != (m,) or sigma.shape != (m,):
            raise ValueError(f"leaf orders must have length {m}")
        for perm in (tau, sigma):
            if not np.array_equal(np.sort(perm), np.arange(m)):
                raise ValueError("leaf orders must be permutations")
        left_cycle = np.empty((m, 2), dtype=np.int64)
        left_cycle[tau, 0] = sigma
        left_cycle[tau, 1] = np.roll(sigma, 1)
        right_cycle = np.empty((m, 2), dtype=np.int64)
        right_cycle[sigma, 0] = tau
        right_cycle[sigma, 1] = np.roll(tau, -1)
        object.__setattr__(self, "left_order", tau)
        object.__setattr__(self, "right_order", sigma)
        object.__setattr__(self, "left_cycle", left_cycle)
        object.__setattr__(self, "right_cycle", right_cycle)

    @property
    def num_vertices(self) -> int:
        return num_vertices(self.n)

    @property
    def entrance(self) -> int:
        return 0

    @property
    def exit(self) -> int:
        return self.num_vertices - 1

    def left_leaf_id(self, i):
        return (1 << self.n) - 1 + i

    def right_leaf_id(self, j):
        return self.num_vertices - (1 << self.n) - j

    def level(self, vid: int) -> int:
        return vertex_at(self.n, vid).level

    def height(self, vid: int) -> int:
        level = self.level(vid)
        return self.n - level if level <= self.n else level - self.n - 1

    def neighbors(self, vid: int) -> list[int]:
        """Sorted canonical ids adjacent to ``vid``."""
        row = self.neighbor_table(np.array([vid], dtype=np.int64))[0]
        return [int(x) for x in row if x < self.num_vertices]

    def degree(self, vid: int) -> int:
        return len(self.neighbors(vid))

    def neighbor_table(self, vids: np.ndarray) -> np.ndarray:
        """Rows of sorted neighbour ids, padded with ``num_vertices``."""
        n = self.n
        total = self.num_vertices
        half = (1 << (n + 1)) - 1
        first_leaf = (1 << n) - 1
        vids = np.asarray(vids, dtype=np.int64)
        left = vids < half
        heap = np.where(left, vids, total - 1 - vids)
        _, exp = np.frexp((heap + 1).astype(np.float64))
        depth = exp.astype(np.int64) - 1
        leaf = depth == n

        def to_id(h):
            return np.where(left, h, total - 1 - h)

        out = np.empty(vids.shape + (3,), dtype=np.int64)
        out[..., 0] = np.where(heap == 0, total, to_id((heap - 1) // 2))
        out[..., 1] = to_id(2 * heap + 1)
        out[..., 2] = to_id(2 * heap + 2)
        if leaf.any():
            li = np.where(leaf & left, heap - first_leaf, 0)
            ri = np.where(leaf & ~left, heap - first_leaf, 0)
            for col in (0, 1):
                via_left = total - (1 << n) - self.left_cycle[li, col]
                via_right = first_leaf + self.right_cycle[ri, col]
                out[..., col + 1] = np.where(
                    leaf, np.where(left, via_left, via_right), out[..., col + 1]
                )
        out.sort(axis=-1)
        return out

    def middle_cycle(self) -> np.ndarray:
        """Canonical ids along the middle cycle, starting at a left leaf."""
        m = 1 << self.n
        cyc = np.empty(2 * m, dtype=np.int64)
        cyc[0::2] = self.left_leaf_id(self.left_order)
        cyc[1::2] = self.right_leaf_id(self.right_order)
        return cyc

    @classmethod
    def from_middle_cycle(cls, n: int, cycle, seed: int | None = None) -> "GluedTreesGraph":
        cyc = np.asarray(cycle, dtype=np.int64)
        m = 1 << n
        if cyc.shape != (2 * m,):
            raise ValueError(f"middle cycle must have length {2 * m}")
        tau = cyc[0::2] - ((1 << n) - 1)
        sigma = num_vertices(n) - (1 << n) - cyc[1::2]
        return cls(n, seed, tau, sigma)


def build_graph(n: int, seed: int) -> GluedTreesGraph:
    """Sample G_n' with a uniformly random alternating middle cycle.

    Both leaf sides are put in uniformly random order (independent streams
    keyed by ``seed``); every alternating Hamiltonian cycle arises from
    exactly ``2 * 2**n`` such pairs, so the cycle is uniform.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    n = int(n)
    check_memory_budget(n)
    m = 1 << n
    tau = random_permutation(derive_key(seed, 1), m)
    sigma = random_permutation(derive_key(seed, 2), m)
    return GluedTreesGraph(n, seed, tau, sigma)


def level_of(g: GluedTreesGraph, v: Vertex) -> int:
    vertex_id(g.n, v)
    return v.level


def height_of(g: GluedTreesGraph, v: Vertex) -> int:
    level = level_of(g, v)
    return g.n - level if level <= g.n else level - g.n - 1


def structural_neighbors(g: GluedTreesGraph, v: Vertex) -> list[Vertex]:
    return [vertex_at(g.n, u) for u in g.neighbors(vertex_id(g.n, v))]


def audit_graph(g: GluedTreesGraph) -> dict:
    """Structural checks used by the graph-audit experiment."""
    n = g.n
    total = g.num_vertices
    ids = np.arange(total, dtype=np.int64)
    table = g.neighbor_table(ids)
    deg = (table < total).sum(axis=1)
    expected_deg = np.full(total, 3)
    expected_deg[[0, total - 1]] = 2
    levels = level_ids(n, ids)
    widths = np.bincount(levels, minlength=2 * n + 2)
    expected_widths = np.array([width(n, lv) for lv in range(2 * n + 2)])

    # symmetry: every (v, u) edge appears as (u, v)
    src = np.repeat(ids, 3)
    dst = table.ravel()
    ok = dst < total
    fwd = src[ok] * total + dst[ok]
    bwd = dst[ok] * total + src[ok]
    symmetric = bool(np.array_equal(np.sort(fwd), np.sort(bwd)))

    # middle edges: every leaf must have exactly two cycle neighbours on the
    # opposite side; a 2-regular graph is one cycle iff it is connected
    m = 1 << n
    leaves = np.concatenate([g.left_leaf_id(np.arange(m)), g.right_leaf_id(np.arange(m))])
    ltab = table[leaves]
    llev = levels[leaves]
    nlev = np.where(ltab < total, level_ids(n, np.minimum(ltab, total - 1)), -1)
    opposite = np.where(llev == n, n + 1, n)[:, None]
    cross = nlev == opposite
    alternating = bool((cross.sum(axis=1) == 2).all())
    cycle_len = 0
    single = False
    if alternating:
        pos = np.full(total, -1, dtype=np.int64)
        pos[leaves] = np.arange(2 * m)
        rows = np.repeat(np.arange(2 * m), 2)
        cols = pos[ltab[cross]]
        adj = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(2 * m, 2 * m))
        ncomp, _ = connected_components(adj, directed=False)
        single = ncomp == 1
        cycle_len = 2 * m if single else 0

    return {
        "n": n,
        "vertices": total,
        "vertex_count_ok": total == (1 << (n + 2)) - 2,
        "degrees_ok": bool(np.array_equal(deg, expected_deg)),
        "widths_ok": bool(np.array_equal(widths, expected_widths)),
        "symmetric": symmetric,
        "cycle_length": cycle_len,
        "cycle_ok": alternating and single,
    }
