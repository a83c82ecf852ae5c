import json

import pytest

from gluedtrees.bounds import floor_root_pow2, total_win_bound
from gluedtrees.graph import build_graph
from gluedtrees.harness import (
    builtin_strategies,
    episode_oracle,
    get_strategy,
    is_exit_response,
    run_episode,
    strategy_record,
    success_rate,
)
from gluedtrees.oracle import INVALID, LazyOracle, make_oracle
from gluedtrees.rng import SplitMix64

STABLE_IDS = ["uniform_walk", "nonbacktracking_walk", "random_dfs", "sprinter", "bfs"]


def test_builtin_ids_are_stable():
    assert builtin_strategies() == STABLE_IDS


def test_budget_zero():
    o = make_oracle(build_graph(3, 1), 1)
    r = run_episode(o, get_strategy("bfs"), 0, SplitMix64(1))
    assert (r.found_exit, r.queries_used) == (False, 0)
    assert success_rate(3, "bfs", 0, 10, 1).mean == 0


def test_bfs_finds_exit_at_n2():
    o = make_oracle(build_graph(2, 3), 4)
    r = run_episode(o, get_strategy("bfs"), 14, SplitMix64(1))
    assert r.found_exit and r.queries_used <= 14
    assert o.query_count == r.queries_used


def test_dfs_success_rate_n2():
    assert success_rate(2, "random_dfs", 20, 200, 42).mean == 1.0


def test_unknown_strategy():
    with pytest.raises(ValueError):
        success_rate(3, "teleport", 4, 1, 1)


@pytest.mark.parametrize("sid", STABLE_IDS)
def test_strategies_deterministic_given_stream(sid):
    def play():
        o = LazyOracle(6, 3, 4)
        return run_episode(o, get_strategy(sid), 40, SplitMix64(9)).transcript

    assert play() == play()


class Guesser:
    id = "guesser"

    def start(self, entrance, rng):
        self.rng = rng

    def next_query(self):
        return 2**80  # not a name of any width

    def observe(self, name, response):
        assert response is INVALID


def test_malformed_names_are_charged():
    o = make_oracle(build_graph(3, 1), 1)
    r = run_episode(o, Guesser(), 5, SplitMix64(1))
    assert r.queries_used == 5 and not r.found_exit
    assert all(resp is INVALID for _, resp in r.transcript)


@pytest.mark.parametrize("sid", STABLE_IDS)
def test_budget_compliance_and_exit_soundness(sid):
    for e in range(30):
        o = episode_oracle(3, 5, e)
        r = run_episode(o, get_strategy(sid), 12, SplitMix64(e))
        assert r.queries_used <= 12
        proof = any(is_exit_response(name, resp, o.entrance_name) for name, resp in r.transcript)
        assert r.found_exit == proof
        assert len(r.transcript) == r.queries_used


def test_lazy_and_eager_oracles_agree_statistically():
    for sid in ("nonbacktracking_walk", "random_dfs"):
        lazy = success_rate(4, sid, 12, 3000, 8)
        eager = success_rate(4, sid, 12, 3000, 8, lazy=False)
        diff = abs(lazy.mean - eager.mean)
        assert diff <= 4 * (lazy.stderr**2 + eager.stderr**2) ** 0.5


def test_success_rate_deterministic_and_worker_independent():
    a = success_rate(4, "sprinter", 10, 600, 3)
    b = success_rate(4, "sprinter", 10, 600, 3, workers=3)
    assert a == b


def test_random_walk_at_n10_under_bound():
    budget = floor_root_pow2(10, 3)
    est = success_rate(10, "nonbacktracking_walk", budget, 100_000, 1)
    assert est.mean <= total_win_bound(budget + 1, 10).total + 3 * est.stderr


def test_json_record():
    rec = strategy_record(success_rate(3, "bfs", 5, 10, 7))
    assert set(rec) == {"n", "strategy_id", "budget", "episodes", "successes", "mean",
                        "ci99_upper", "master_seed"}
    json.dumps(rec)


def test_lower_bound_consistency_all_strategies():
    for n in range(9, 19):
        budget = floor_root_pow2(n, 3)
        bound = total_win_bound(budget + 1, n).total
        for sid in STABLE_IDS:
            est = success_rate(n, sid, budget, 500, 1000 + n)
            assert est.ci99_upper <= bound, (n, sid, est)
