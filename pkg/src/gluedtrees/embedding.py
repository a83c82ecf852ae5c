"""The random-embedding game on G_n'.

A query tree ``T`` is mapped into the graph node by node: the root goes to
ENTRANCE, and every other node goes to a uniformly chosen neighbour of its
parent's image, excluding its grandparent's image (non-backtracking).  The
algorithm wins if some image is the EXIT or if the embedding is improper:
two nodes share an image that was reached from different parent images.

Randomness is counter based.  Trial ``i`` under ``master_seed`` uses the
stream ``derive_key(master_seed, i)`` and node ``a`` consumes output ``a-1``
of it; a two-candidate choice takes the candidate (in increasing id order)
selected by the output's top bit.  In the two-level estimators graph ``g``
uses seed ``derive_key(master_seed, 1, g)`` and its trials use
``derive_key(master_seed, 2, g, i)``.  Counts are aggregated as integers, so
results do not depend on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ResourceBudgetError
from .graph import GluedTreesGraph, build_graph
from .rng import SplitMix64, derive_key, derive_keys, splitmix_array
from .stats import Estimate, binomial_estimate, clustered_estimate
from .trees import SHAPES, RootedTree, make_tree

CHUNK = 1 << 15
MAX_ENUMERATION_LEAVES = 1 << 21
MAX_PAIR_NODES = 64
EVENTS = ("win", "exit", "improper")


@dataclass(frozen=True)
class Embedding:
    image: tuple[int, ...]


@dataclass(frozen=True)
class GameResult:
    exited: bool
    improper: bool

    @property
    def won(self) -> bool:
        return self.exited or self.improper


def _candidates(g: GluedTreesGraph, parent_img: int, grand_img: int) -> list[int]:
    return [u for u in g.neighbors(parent_img) if u != grand_img]


def sample_embedding(g: GluedTreesGraph, T: RootedTree, rng: SplitMix64) -> Embedding:
    image = [g.entrance]
    for a in range(1, T.t):
        p = T.parent[a]
        grand = image[T.parent[p]] if p > 0 else -1
        cands = _candidates(g, image[p], grand)
        u = rng.next_u64()
        image.append(cands[u >> 63] if len(cands) == 2 else cands[0])
    return Embedding(tuple(image))


def is_improper(T: RootedTree, e: Embedding) -> bool:
    parents_seen: dict[int, int] = {}
    for a in range(1, T.t):
        img, pimg = e.image[a], e.image[T.parent[a]]
        prev = parents_seen.setdefault(img, pimg)
        if prev != pimg:
            return True
    return False


def reaches_exit(g: GluedTreesGraph, e: Embedding) -> bool:
    return g.exit in e.image


def play_game(g: GluedTreesGraph, T: RootedTree, rng: SplitMix64) -> GameResult:
    e = sample_embedding(g, T, rng)
    return GameResult(exited=reaches_exit(g, e), improper=is_improper(T, e))


def enumerate_win_probability(
    g: GluedTreesGraph,
    T: RootedTree,
    event: str = "win",
    max_leaves: int = MAX_ENUMERATION_LEAVES,
) -> Fraction:
    """Exact probability of ``event`` on the fixed graph ``g``.

    Depth-first over every candidate choice, each branch weighted by
    ``1/len(candidates)``.
    """
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    if 1 << max(T.t - 1, 0) > max_leaves:
        raise ResourceBudgetError(
            f"enumerating t={T.t} needs up to 2**{T.t - 1} branches (budget {max_leaves})"
        )
    nbrs: dict[int, list[int]] = {}

    def neighbors(v):
        if v not in nbrs:
            nbrs[v] = g.neighbors(v)
        return nbrs[v]

    parent = T.parent
    image = [g.entrance] + [0] * (T.t - 1)
    total = Fraction(0)

    def wins() -> bool:
        e = Embedding(tuple(image))
        if event == "exit":
            return reaches_exit(g, e)
        if event == "improper":
            return is_improper(T, e)
        return reaches_exit(g, e) or is_improper(T, e)

    def walk(a: int, halvings: int) -> None:
        nonlocal total
        if a == T.t:
            if wins():
                total += Fraction(1, 1 << halvings)
            return
        p = parent[a]
        grand = image[parent[p]] if p > 0 else -1
        cands = [u for u in neighbors(image[p]) if u != grand]
        extra = 1 if len(cands) == 2 else 0
        for u in cands:
            image[a] = u
            walk(a + 1, halvings + extra)

    walk(1, 0)
    return total


def sample_images(g: GluedTreesGraph, T: RootedTree, keys: np.ndarray) -> np.ndarray:
    """Images of all tree nodes for a batch of trial keys, shape ``(t, K)``."""
    keys = np.asarray(keys, dtype=np.uint64)
    k = keys.size
    total = g.num_vertices
    imgs = np.empty((T.t, k), dtype=np.int64)
    imgs[0] = g.entrance
    rows = np.arange(k)
    for a in range(1, T.t):
        p = T.parent[a]
        tab = g.neighbor_table(imgs[p])
        if p > 0:
            grand = imgs[T.parent[p]]
            tab = np.where(tab == grand[:, None], total, tab)
            tab.sort(axis=1)
        two = tab[:, 1] < total
        bit = (splitmix_array(keys, a - 1) >> np.uint64(63)).astype(np.int64)
        imgs[a] = tab[rows, np.where(two, bit, 0)]
    return imgs


def improper_mask(T: RootedTree, imgs: np.ndarray, num_vertices: int) -> np.ndarray:
    k = imgs.shape[1]
    out = np.zeros(k, dtype=bool)
    if T.t < 3:
        return out
    parent = np.asarray(T.parent[1:])
    img = imgs[1:]
    pimg = imgs[parent]
    trial = np.broadcast_to(np.arange(k), img.shape)
    key = (trial * num_vertices + img).ravel()
    pkey = pimg.ravel()
    order = np.lexsort((pkey, key))
    ks, ps = key[order], pkey[order]
    clash = (ks[1:] == ks[:-1]) & (ps[1:] != ps[:-1])
    out[ks[1:][clash] // num_vertices] = True
    return out


def _outcomes(g, T, keys):
    imgs = sample_images(g, T, keys)
    exited = (imgs == g.exit).any(axis=0)
    improper = improper_mask(T, imgs, g.num_vertices)
    return imgs, exited, improper


def _count_range(args) -> tuple[int, int, int]:
    g, parent, base_key, start, stop = args
    if isinstance(g, tuple):
        g = _cached_graph(*g)
    T = RootedTree(parent)
    keys = derive_keys(base_key, np.arange(start, stop, dtype=np.uint64))
    _, exited, improper = _outcomes(g, T, keys)
    return int(exited.sum()), int(improper.sum()), int((exited | improper).sum())


@lru_cache(maxsize=8)
def _cached_graph(n: int, seed: int) -> GluedTreesGraph:
    return build_graph(n, seed)


def _chunks(trials: int):
    for start in range(0, trials, CHUNK):
        yield start, min(start + CHUNK, trials)


def _run(tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [_count_range(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_count_range, tasks))


def _pick(counts, event: str) -> int:
    exits, impropers, wins = counts
    return {"exit": exits, "improper": impropers, "win": wins}[event]


def estimate_win_probability(
    g: GluedTreesGraph,
    T: RootedTree,
    trials: int,
    master_seed: int,
    event: str = "win",
    workers: int = 1,
) -> Estimate:
    """Monte Carlo estimate of P^G(T) (or of the exit / improper part)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    base = derive_key(master_seed)
    tasks = [(g, T.parent, base, a, b) for a, b in _chunks(trials)]
    hits = sum(_pick(c, event) for c in _run(tasks, workers))
    return binomial_estimate(
        hits, trials, seed=master_seed,
        parameters={"n": g.n, "t": T.t, "event": event, "graph_seed": g.seed},
    )


def graph_seed(master_seed: int, graph_index: int) -> int:
    return derive_key(master_seed, 1, graph_index)


def estimate_expected_win(
    n: int,
    T: RootedTree,
    graph_trials: int,
    embed_trials_per_graph: int,
    master_seed: int,
    event: str = "win",
    workers: int = 1,
) -> Estimate:
    """Two-level estimate of E_G[P^G(T)] with cluster-robust errors."""
    if graph_trials < 1 or embed_trials_per_graph < 1:
        raise ValueError("budgets must be >= 1")
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    tasks, owner = [], []
    for gi in range(graph_trials):
        base = derive_key(master_seed, 2, gi)
        for a, b in _chunks(embed_trials_per_graph):
            tasks.append(((n, graph_seed(master_seed, gi)), T.parent, base, a, b))
            owner.append(gi)
    per_graph = [0] * graph_trials
    for gi, counts in zip(owner, _run(tasks, workers)):
        per_graph[gi] += _pick(counts, event)
    return clustered_estimate(
        per_graph, [embed_trials_per_graph] * graph_trials, seed=master_seed,
        parameters={
            "n": n, "t": T.t, "event": event,
            "graph_trials": graph_trials, "embed_trials_per_graph": embed_trials_per_graph,
        },
    )


def pair_audit(
    n: int,
    T: RootedTree,
    graph_trials: int,
    embed_trials: int,
    master_seed: int,
) -> tuple[dict[tuple[int, int], Estimate], Estimate]:
    """Per-pair improper-event frequencies plus Pr[improper] on the same samples."""
    if T.t > MAX_PAIR_NODES:
        raise ResourceBudgetError(f"pair map for t={T.t} exceeds {MAX_PAIR_NODES} nodes")
    pairs = [(a, b) for a in range(1, T.t) for b in range(a + 1, T.t)]
    pa = np.array([a for a, _ in pairs], dtype=np.int64)
    pb = np.array([b for _, b in pairs], dtype=np.int64)
    parent = np.asarray(T.parent)
    per_pair = np.zeros((graph_trials, len(pairs)), dtype=np.int64)
    per_graph_improper = [0] * graph_trials
    for gi in range(graph_trials):
        g = build_graph(n, graph_seed(master_seed, gi))
        base = derive_key(master_seed, 2, gi)
        for a, b in _chunks(embed_trials):
            keys = derive_keys(base, np.arange(a, b, dtype=np.uint64))
            imgs, _, improper = _outcomes(g, T, keys)
            per_graph_improper[gi] += int(improper.sum())
            if pairs:
                hit = (imgs[pa] == imgs[pb]) & (imgs[parent[pa]] != imgs[parent[pb]])
                per_pair[gi] += hit.sum(axis=1)
    sizes = [embed_trials] * graph_trials
    params = {"n": n, "t": T.t, "graph_trials": graph_trials, "embed_trials": embed_trials}
    freq = {
        pair: clustered_estimate(per_pair[:, j].tolist(), sizes, seed=master_seed,
                                 parameters={**params, "pair": list(pair)})
        for j, pair in enumerate(pairs)
    }
    return freq, clustered_estimate(per_graph_improper, sizes, seed=master_seed, parameters=params)


def improper_pair_frequency(n, T, graph_trials, embed_trials, master_seed):
    return pair_audit(n, T, graph_trials, embed_trials, master_seed)[0]


def candidate_trees(t: int, candidates: int, master_seed: int) -> list[RootedTree]:
    """Deterministic candidate list: the fixed shapes first, then random ones."""
    fixed = [make_tree(s, t) for s in SHAPES if s != "random_attach"]
    out = fixed[:candidates]
    i = 0
    while len(out) < candidates:
        out.append(make_tree("random_attach", t, derive_key(master_seed, 3, i)))
        i += 1
    return out


def search_worst_tree(
    n: int,
    t: int,
    candidates: int,
    graph_trials: int,
    embed_trials: int,
    master_seed: int,
    workers: int = 1,
) -> tuple[RootedTree, Estimate]:
    """Best-scoring candidate under common random numbers.

    This only samples the space of trees, so the returned mean is a lower
    bound on ``max_T E_G[P^G(T)]`` up to Monte Carlo error.
    """
    if candidates < 1:
        raise ValueError("candidates must be >= 1")
    best = None
    for tree in candidate_trees(t, candidates, master_seed):
        est = estimate_expected_win(n, tree, graph_trials, embed_trials, master_seed, workers=workers)
        if best is None or est.mean > best[1].mean:
            best = (tree, est)
    return best
