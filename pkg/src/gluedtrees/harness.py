"""Classical query strategies played against the black-box oracle.

Strategies see only names and responses.  An episode ends when a response
of degree 2 arrives for a name other than the ENTRANCE name (that vertex is
the EXIT) or when the query budget is spent.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .graph import build_graph
from .oracle import INVALID, LazyOracle, make_oracle
from .rng import SplitMix64, derive_key
from .stats import Estimate, binomial_estimate

MAX_FREE_MOVES = 10_000
EPISODE_CHUNK = 256


@dataclass
class EpisodeResult:
    found_exit: bool
    queries_used: int
    strategy_id: str
    transcript: list = field(default_factory=list, repr=False)


def is_exit_response(name: int, response, entrance_name: int) -> bool:
    return response is not INVALID and len(response) == 2 and name != entrance_name


class Strategy:
    """Base class: keeps the explored map and the discovered frontier."""

    id = "base"

    def start(self, entrance: int, rng: SplitMix64) -> None:
        self.entrance = entrance
        self.rng = rng
        self.known: dict[int, tuple] = {}
        self.frontier: dict[int, None] = {entrance: None}  # insertion-ordered set

    def observe(self, name: int, response) -> None:
        self.frontier.pop(name, None)
        if response is INVALID:
            self.known[name] = ()
            return
        self.known[name] = response
        for u in response:
            if u not in self.known:
                self.frontier.setdefault(u, None)

    def next_query(self) -> int | None:
        raise NotImplementedError

    def _any_frontier(self) -> int | None:
        if not self.frontier:
            return None
        return self.rng.choice(list(self.frontier))


class UniformWalk(Strategy):
    """Simple random walk; moves over already-queried vertices are free."""

    id = "uniform_walk"
    backtrack = True

    def start(self, entrance, rng):
        super().start(entrance, rng)
        self.current = entrance
        self.previous = None

    def next_query(self):
        for _ in range(MAX_FREE_MOVES):
            if self.current not in self.known:
                return self.current
            nbrs = self.known[self.current]
            if not self.backtrack and len(nbrs) > 1:
                nbrs = [u for u in nbrs if u != self.previous]
            self.previous, self.current = self.current, self.rng.choice(nbrs)
        self.previous, self.current = None, self._any_frontier()
        return self.current


class NonBacktrackingWalk(UniformWalk):
    id = "nonbacktracking_walk"
    backtrack = False


class RandomDFS(Strategy):
    id = "random_dfs"

    def start(self, entrance, rng):
        super().start(entrance, rng)
        self.stack = [entrance]

    def observe(self, name, response):
        super().observe(name, response)
        fresh = [u for u in (response or ()) if u not in self.known]
        self.rng.shuffle(fresh)
        self.stack.extend(fresh)

    def next_query(self):
        while self.stack:
            name = self.stack.pop()
            if name not in self.known:
                return name
        return None


class BFS(Strategy):
    id = "bfs"

    def start(self, entrance, rng):
        super().start(entrance, rng)
        self.queue = deque([entrance])

    def observe(self, name, response):
        super().observe(name, response)
        self.queue.extend(u for u in (response or ()) if u not in self.known)

    def next_query(self):
        while self.queue:
            name = self.queue.popleft()
            if name not in self.known:
                return name
        return None


class Sprinter(Strategy):
    """Walk that always steps to an unqueried neighbour when one exists."""

    id = "sprinter"

    def start(self, entrance, rng):
        super().start(entrance, rng)
        self.current = entrance

    def next_query(self):
        if self.current in self.known:
            fresh = [u for u in self.known[self.current] if u not in self.known]
            self.current = self.rng.choice(fresh) if fresh else self._any_frontier()
        return self.current


STRATEGIES = {cls.id: cls for cls in (UniformWalk, NonBacktrackingWalk, RandomDFS, Sprinter, BFS)}


def builtin_strategies() -> list[str]:
    return list(STRATEGIES)


def get_strategy(strategy_id: str) -> Strategy:
    try:
        return STRATEGIES[strategy_id]()
    except KeyError:
        raise ValueError(f"unknown strategy {strategy_id!r}; known: {sorted(STRATEGIES)}") from None


def run_episode(oracle, strategy: Strategy, budget: int, rng: SplitMix64) -> EpisodeResult:
    if budget < 0:
        raise ValueError("budget must be >= 0")
    entrance = oracle.entrance_name
    strategy.start(entrance, rng)
    transcript = []
    found = False
    while len(transcript) < budget:
        name = strategy.next_query()
        if name is None:
            break
        response = oracle.query(name)
        transcript.append((name, response))
        strategy.observe(name, response)
        if is_exit_response(name, response, entrance):
            found = True
            break
    return EpisodeResult(found, len(transcript), strategy.id, transcript)


def episode_oracle(n: int, master_seed: int, episode: int, lazy: bool = True):
    gseed = derive_key(master_seed, 5, episode)
    nseed = derive_key(master_seed, 6, episode)
    if lazy:
        return LazyOracle(n, gseed, nseed)
    return make_oracle(build_graph(n, gseed), nseed)


def _episodes(args) -> int:
    n, strategy_id, budget, master_seed, start, stop, lazy = args
    wins = 0
    for e in range(start, stop):
        oracle = episode_oracle(n, master_seed, e, lazy)
        rng = SplitMix64(derive_key(master_seed, 7, e))
        wins += run_episode(oracle, get_strategy(strategy_id), budget, rng).found_exit
    return wins


def success_rate(
    n: int,
    strategy_id: str,
    budget: int,
    episodes: int,
    master_seed: int,
    workers: int = 1,
    lazy: bool = True,
) -> Estimate:
    """Fraction of fresh-oracle episodes in which the strategy finds the EXIT."""
    get_strategy(strategy_id)
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    tasks = [
        (n, strategy_id, budget, master_seed, a, min(a + EPISODE_CHUNK, episodes), lazy)
        for a in range(0, episodes, EPISODE_CHUNK)
    ]
    if workers <= 1 or len(tasks) == 1:
        counts = [_episodes(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_episodes, tasks))
    return binomial_estimate(
        sum(counts), episodes, seed=master_seed,
        parameters={"n": n, "strategy_id": strategy_id, "budget": budget},
    )


def strategy_record(est: Estimate) -> dict:
    p = est.parameters
    return {
        "n": p["n"],
        "strategy_id": p["strategy_id"],
        "budget": p["budget"],
        "episodes": est.trials,
        "successes": est.successes,
        "mean": est.mean,
        "ci99_upper": est.ci99_upper,
        "master_seed": est.seed,
    }


def best_strategy(n: int, budget: int, episodes: int, master_seed: int, workers: int = 1) -> Estimate:
    """Highest-scoring builtin strategy (first wins ties)."""
    best = None
    for sid in builtin_strategies():
        est = success_rate(n, sid, budget, episodes, master_seed, workers)
        if best is None or est.mean > best.mean:
            best = est
    return best
