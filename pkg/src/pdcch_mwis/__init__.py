"""PDCCH candidate selection as maximum weighted independent set."""

from .graph import WeightedGraph, brute_force_mwis, build_graph, is_independent_set, set_weight
from .pdcch import (
    Algorithm,
    Candidate,
    CoresetConfig,
    Direction,
    SearchSpaceConfig,
    Selection,
    UEConfig,
    build_incompatibility_graph,
    check_selection,
    generate_candidates,
    hash_candidates,
    schedule,
)
from .solvers import (
    GreedyMetric,
    GreedySeeded,
    SolveResult,
    UniformRandom,
    exact_recursion,
    forest_mwis,
    fr_solve,
    greedy,
    greedy_lower_bound,
)

__version__ = "0.1.0"
