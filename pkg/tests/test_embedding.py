from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from gluedtrees.bounds import exit_bound, improper_bound
from gluedtrees.embedding import (
    Embedding,
    candidate_trees,
    enumerate_win_probability,
    estimate_expected_win,
    estimate_win_probability,
    improper_mask,
    improper_pair_frequency,
    is_improper,
    pair_audit,
    play_game,
    reaches_exit,
    sample_embedding,
    sample_images,
    search_worst_tree,
)
from gluedtrees.errors import ResourceBudgetError
from gluedtrees.graph import build_graph
from gluedtrees.rng import SplitMix64, derive_key, derive_keys
from gluedtrees.trees import RootedTree, make_tree
from oracles import brute_force_probability, improper_literal

SINGLE = make_tree("path", 1)
EDGE = make_tree("path", 2)

# exact P^G(T) for build_graph(2, 7), T = path of 6 nodes, pinned from the
# bit-string brute force in tests/oracles.py
N2_SEED7_PATH6 = Fraction(1, 4)


def test_single_node_and_single_edge():
    g = build_graph(3, 1)
    rng = SplitMix64(1)
    assert sample_embedding(g, SINGLE, rng).image == (0,)
    assert not play_game(g, SINGLE, rng).won
    assert not play_game(g, EDGE, rng).won
    assert enumerate_win_probability(g, SINGLE) == 0
    assert enumerate_win_probability(g, EDGE) == 0
    assert estimate_win_probability(g, SINGLE, 1000, 1).mean == 0


def test_first_step_is_uniform_over_entrance_children():
    g = build_graph(4, 2)
    keys = derive_keys(derive_key(3), np.arange(100_000, dtype=np.uint64))
    imgs = sample_images(g, EDGE, keys)
    counts = [int((imgs[1] == c).sum()) for c in g.neighbors(0)]
    assert sum(counts) == 100_000
    assert chisquare(counts).pvalue > 0.001


def test_degree_three_continuations_are_uniform():
    g = build_graph(4, 2)
    tree = make_tree("path", 3)
    keys = derive_keys(derive_key(4), np.arange(100_000, dtype=np.uint64))
    imgs = sample_images(g, tree, keys)
    for child in g.neighbors(0):
        sel = imgs[1] == child
        options = [u for u in g.neighbors(child) if u != 0]
        counts = [int((imgs[2][sel] == u).sum()) for u in options]
        assert sum(counts) == int(sel.sum())
        assert chisquare(counts).pvalue > 0.001


def test_exit_unreachable_for_short_trees():
    n = 3
    g = build_graph(n, 5)
    for shape in ("path", "random_attach"):
        tree = make_tree(shape, 2 * n + 1, 3)
        assert enumerate_win_probability(g, tree, event="exit") == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_straight_path_exit_probability_is_two_to_minus_n(n):
    # down the left tree and across are forced; each of the n climbs is a coin flip
    tree = make_tree("path", 2 * n + 2)
    for seed in range(3):
        g = build_graph(n, seed)
        assert enumerate_win_probability(g, tree, event="exit") == Fraction(1, 2**n)


def test_pinned_regression_value_n2_path6():
    g = build_graph(2, 7)
    tree = make_tree("path", 6)
    assert brute_force_probability(2, g.middle_cycle(), tree.parent) == N2_SEED7_PATH6
    assert enumerate_win_probability(g, tree) == N2_SEED7_PATH6
    est = estimate_win_probability(g, tree, 10**6, 17)
    assert abs(est.mean - float(N2_SEED7_PATH6)) <= 3 * est.stderr


def test_exit_frequency_matches_enumeration_n3():
    g = build_graph(3, 8)
    tree = make_tree("path", 8)
    exact = enumerate_win_probability(g, tree, event="exit")
    est = estimate_win_probability(g, tree, 10**6, 2, event="exit")
    assert abs(est.mean - float(exact)) <= 3 * est.stderr


def test_n3_path8_win_matches_enumeration():
    g = build_graph(3, 9)
    tree = make_tree("path", 8)
    exact = enumerate_win_probability(g, tree)
    est = estimate_win_probability(g, tree, 200_000, 5)
    assert abs(est.mean - float(exact)) <= 3 * est.stderr


@pytest.mark.parametrize("event", ["win", "exit", "improper"])
def test_enumeration_matches_brute_force_on_corpus(corpus, event):
    for n in (2, 3):
        g = build_graph(n, 31)
        for tree in corpus:
            expected = brute_force_probability(n, g.middle_cycle(), tree.parent, event)
            assert enumerate_win_probability(g, tree, event=event) == expected


def test_enumeration_budget():
    g = build_graph(3, 1)
    with pytest.raises(ResourceBudgetError):
        enumerate_win_probability(g, make_tree("path", 30))
    with pytest.raises(ResourceBudgetError):
        enumerate_win_probability(g, make_tree("path", 8), max_leaves=64)


def test_vectorised_sampler_matches_scalar_sampler(corpus):
    g = build_graph(3, 4)
    for tree in corpus:
        keys = derive_keys(derive_key(11), np.arange(40, dtype=np.uint64))
        imgs = sample_images(g, tree, keys)
        mask = improper_mask(tree, imgs, g.num_vertices)
        for i in range(40):
            e = sample_embedding(g, tree, SplitMix64.from_seed(11, i))
            assert tuple(imgs[:, i]) == e.image
            assert mask[i] == is_improper(tree, e) == improper_literal(tree.parent, e.image)


def test_is_improper_examples():
    siblings = RootedTree((-1, 0, 0))
    assert not is_improper(siblings, Embedding((0, 1, 1)))
    assert not is_improper(SINGLE, Embedding((0,)))
    # siblings under node 1 sharing an image: same parent image, not improper
    assert is_improper(RootedTree((-1, 0, 1, 1)), Embedding((0, 2, 5, 5))) is False
    # nodes 2 and 4 share image 4 but their parents sit at images 1 and 9
    assert is_improper(RootedTree((-1, 0, 1, 2, 3)), Embedding((0, 1, 4, 9, 4))) is True


def test_reaches_exit():
    g = build_graph(2, 1)
    assert not reaches_exit(g, Embedding((0,)))
    assert reaches_exit(g, Embedding((0, g.exit)))


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(1, 6),
    seed=st.integers(0, 2**32),
    shape=st.sampled_from(["path", "caterpillar", "random_attach", "full_binary"]),
    t=st.integers(1, 40),
    tree_seed=st.integers(0, 1000),
)
def test_embedding_validity(n, seed, shape, t, tree_seed):
    g = build_graph(n, seed)
    tree = make_tree(shape, t, tree_seed)
    keys = derive_keys(derive_key(seed), np.arange(64, dtype=np.uint64))
    imgs = sample_images(g, tree, keys)
    assert (imgs[0] == 0).all()
    for a in range(1, t):
        p = tree.parent[a]
        for i in range(0, 64, 7):
            assert imgs[a, i] in g.neighbors(int(imgs[p, i]))
            if p > 0:
                assert imgs[a, i] != imgs[tree.parent[p], i]


def test_estimates_are_deterministic_and_worker_independent():
    g = build_graph(3, 2)
    tree = make_tree("random_attach", 8, 1)
    a = estimate_win_probability(g, tree, 100_000, 1)
    b = estimate_win_probability(g, tree, 100_000, 1)
    c = estimate_win_probability(g, tree, 100_000, 1, workers=3)
    assert a == b == c
    d = estimate_expected_win(3, tree, 5, 20_000, 9)
    e = estimate_expected_win(3, tree, 5, 20_000, 9, workers=2)
    assert d == e


def test_expected_win_single_node_is_zero():
    assert estimate_expected_win(4, SINGLE, 3, 100, 1).mean == 0


def test_expected_win_under_total_bound_n5_t4():
    from gluedtrees.bounds import total_win_bound

    tree = make_tree("random_attach", 4, 12)
    est = estimate_expected_win(5, tree, 100, 10_000, 3)
    assert est.trials == 10**6
    assert est.ci99_upper <= total_win_bound(4, 5).total


def test_expected_win_matches_average_of_exact_values():
    tree = make_tree("path", 7)
    est = estimate_expected_win(2, tree, 40, 5000, 21)
    from gluedtrees.embedding import graph_seed

    exact = np.mean([float(enumerate_win_probability(build_graph(2, graph_seed(21, gi)), tree))
                     for gi in range(40)])
    # the per-graph exact average is what the two-level estimator targets for these graphs
    assert abs(est.mean - exact) <= 3 * (exact * (1 - exact) / est.trials) ** 0.5 + 1e-12


def test_exit_and_improper_bounds_hold_empirically():
    for n, t in [(6, 4), (9, 8), (12, 16)]:
        tree = make_tree("random_attach", t, n)
        ex = estimate_expected_win(n, tree, 20, 5000, 1, event="exit")
        imp = estimate_expected_win(n, tree, 20, 5000, 1, event="improper")
        assert ex.mean <= exit_bound(t, n) + 3 * ex.stderr
        assert imp.mean <= improper_bound(t, n) + 3 * imp.stderr


def test_pair_frequency_edge_cases_and_union_direction():
    assert improper_pair_frequency(3, EDGE, 2, 100, 1) == {}
    tree = make_tree("random_attach", 9, 4)
    freq, improper = pair_audit(3, tree, 5, 4000, 2)
    assert len(freq) == 8 * 7 // 2
    total = sum(e.mean for e in freq.values())
    assert total >= improper.mean - 3 * improper.stderr
    with pytest.raises(ResourceBudgetError):
        pair_audit(3, make_tree("path", 80), 1, 1, 1)


def test_search_worst_tree():
    tree, est = search_worst_tree(3, 1, 4, 2, 100, 1)
    assert tree.t == 1 and est.mean == 0
    only = candidate_trees(6, 1, 5)[0]
    tree, est = search_worst_tree(3, 6, 1, 3, 2000, 5)
    assert tree == only
    assert est == estimate_expected_win(3, only, 3, 2000, 5)


def test_search_worst_tree_respects_bound():
    from gluedtrees.bounds import total_win_bound

    for n in (6, 9):
        t = 2 ** (n // 3)
        _, est = search_worst_tree(n, t, 6, 10, 5000, 2)
        assert est.mean <= total_win_bound(t, n).total + 3 * est.stderr
