"""Glued-trees traversal: black-box oracle, random-embedding game and query lower bounds."""

__version__ = "0.1.0"

from .bounds import BoundReport, total_win_bound
from .embedding import (
    Embedding,
    GameResult,
    enumerate_win_probability,
    estimate_expected_win,
    estimate_win_probability,
    improper_pair_frequency,
    is_improper,
    play_game,
    reaches_exit,
    sample_embedding,
    search_worst_tree,
)
from .graph import GluedTreesGraph, Vertex, build_graph, height_of, level_of, structural_neighbors
from .harness import builtin_strategies, run_episode, success_rate
from .oracle import INVALID, LazyOracle, Oracle, make_oracle, oracle_query
from .rng import SplitMix64
from .stats import Estimate
from .trees import RootedTree, make_tree
