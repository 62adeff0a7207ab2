"""MWIS solvers: greedy, forest DP, Feige-Reichman, and exact branching."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .graph import GraphError, WeightedGraph, set_weight
from .rng import make_rng

EXACT_MAX_NODES = 60


class CycleError(GraphError):
    pass


class OrderError(GraphError):
    pass


class SizeGuardError(GraphError):
    pass


class GreedyMetric(enum.Enum):
    WEIGHT = "weight"
    WDR = "wdr"


@dataclass(frozen=True)
class GreedySeeded:
    """FR ordering: WDR-greedy picks first, then the rest by WDR on the input graph."""


@dataclass(frozen=True)
class UniformRandom:
    seed: int


FrOrdering = Union[GreedySeeded, UniformRandom]


@dataclass
class SolveResult:
    selected: set[int]
    value: float
    iterations: int = 0

    def to_dict(self) -> dict:
        return {"selected": sorted(self.selected), "value": self.value, "iterations": self.iterations}


@dataclass
class ForestDPTable:
    yes_value: dict[int, float] = field(default_factory=dict)
    no_value: dict[int, float] = field(default_factory=dict)
    choice: dict[int, bool] = field(default_factory=dict)
    roots: list[int] = field(default_factory=list)


def _result(g: WeightedGraph, selected: Iterable[int], iterations: int) -> SolveResult:
    chosen = set(selected)
    return SolveResult(chosen, set_weight(g, chosen), iterations)


def wdr(weight: float, degree: int) -> float:
    return weight / (degree + 1)


def _wdr_pick(work: WeightedGraph) -> int:
    # highest w/(deg+1); exact ties go to the lowest node id
    best_v, best_m = -1, -math.inf
    adj = work._adj
    for v, w in work._weight.items():
        m = w / (len(adj[v]) + 1)
        if m > best_m or (m == best_m and v < best_v):
            best_v, best_m = v, m
    return best_v


def greedy_lower_bound(g: WeightedGraph) -> float:
    return math.fsum(wdr(g.weight(v), g.degree(v)) for v in g.nodes)


def static_greedy(g: WeightedGraph, score: Mapping[int, float]) -> SolveResult:
    """Greedy with a metric that does not depend on the residual graph.

    Visiting nodes by (score desc, id asc) and keeping each one that has no
    kept neighbour is the same as repeatedly taking the best remaining node
    and deleting its closed neighbourhood.
    """
    taken: set[int] = set()
    blocked: set[int] = set()
    for v in sorted(g.nodes, key=lambda v: (-score[v], v)):
        if v in blocked:
            continue
        taken.add(v)
        blocked.add(v)
        blocked |= g.neighbors(v)
    return _result(g, taken, len(taken))


def greedy(g: WeightedGraph, metric: GreedyMetric = GreedyMetric.WDR) -> SolveResult:
    if metric is GreedyMetric.WEIGHT:
        return static_greedy(g, g.weights())
    work = g.copy()
    taken = []
    while len(work):
        v = _wdr_pick(work)
        taken.append(v)
        work.remove_closed_neighborhood(v)
    return _result(g, taken, len(taken))


def _components(g: WeightedGraph, alive: set[int] | None = None) -> list[list[int]]:
    """Connected components, each as a BFS order from its smallest id."""
    alive = set(g.nodes) if alive is None else alive
    seen: set[int] = set()
    comps = []
    for root in sorted(alive):
        if root in seen:
            continue
        seen.add(root)
        order = [root]
        for v in order:
            for u in g.neighbors(v):
                if u in alive and u not in seen:
                    seen.add(u)
                    order.append(u)
        comps.append(order)
    return comps


def is_forest(g: WeightedGraph) -> bool:
    return g.n_edges == len(g) - len(_components(g))


def forest_dp(g: WeightedGraph) -> ForestDPTable:
    """Leaf-to-root DP for MWIS on a forest; raises CycleError otherwise."""
    comps = _components(g)
    if g.n_edges != len(g) - len(comps):
        raise CycleError("input graph is not a forest")
    table = ForestDPTable()
    yes, no = table.yes_value, table.no_value
    for comp in comps:
        root = comp[0]
        table.roots.append(root)
        parent = {root: None}
        # BFS order lists parents before children, so reversed is post-order
        for v in comp:
            for u in g.neighbors(v):
                if u != parent[v]:
                    parent[u] = v
        for v in reversed(comp):
            yes[v] = g.weight(v) + yes.get(v, 0.0)
            no.setdefault(v, 0.0)
            table.choice[v] = yes[v] > no[v]
            p = parent[v]
            if p is not None:
                yes[p] = yes.get(p, 0.0) + no[v]
                no[p] = no.get(p, 0.0) + max(no[v], yes[v])
    return table


def forest_mwis(g: WeightedGraph) -> SolveResult:
    table = forest_dp(g)
    taken: set[int] = set()
    for root in table.roots:
        stack = [(root, None)]
        while stack:
            v, p = stack.pop()
            if p not in taken and table.choice[v]:
                taken.add(v)
            for u in g.neighbors(v):
                if u != p:
                    stack.append((u, v))
    return _result(g, taken, len(g))


def fr_extract_forest(g: WeightedGraph, order: list[int]) -> WeightedGraph:
    if len(order) != len(g) or set(order) != set(g.nodes):
        raise OrderError("order must be a permutation of the graph nodes")
    forest = WeightedGraph()
    for c in order:
        earlier = g.neighbors(c) & forest._weight.keys()
        if len(earlier) <= 1:
            forest.add_node(c, g.weight(c))
            for nbr in earlier:
                forest.add_edge(c, nbr)
    return forest


def fr_order(g: WeightedGraph, ordering: FrOrdering) -> list[int]:
    if isinstance(ordering, UniformRandom):
        rng = make_rng(ordering.seed, 0, 0)
        return [int(v) for v in rng.permutation(g.nodes)]
    seed = sorted(greedy(g, GreedyMetric.WDR).selected)
    first = set(seed)
    rest = sorted((v for v in g.nodes if v not in first), key=lambda v: (-wdr(g.weight(v), g.degree(v)), v))
    return seed + rest


def fr_solve(g: WeightedGraph, ordering: FrOrdering = GreedySeeded()) -> SolveResult:
    forest = fr_extract_forest(g, fr_order(g, ordering))
    res = forest_mwis(forest)
    return _result(g, res.selected, len(forest))


def exact_recursion(g: WeightedGraph, max_nodes: int | None = EXACT_MAX_NODES) -> SolveResult:
    """Optimal MWIS by branching on a node: drop it, or take it and drop its neighbours.

    Components are solved separately and isolated nodes are taken outright.
    The branching node is the one of maximum residual degree (lowest id on ties).
    """
    if max_nodes is not None and len(g) > max_nodes:
        raise SizeGuardError(f"exact solver limited to {max_nodes} nodes, got {len(g)}")
    calls = 0

    def solve(alive: set[int]) -> tuple[float, list[int]]:
        nonlocal calls
        calls += 1
        total, taken = 0.0, []
        for comp in _components(g, alive):
            if len(comp) == 1:
                total += g.weight(comp[0])
                taken.append(comp[0])
                continue
            members = set(comp)
            p = min(comp, key=lambda v: (-len(g.neighbors(v) & members), v))
            members.discard(p)
            no_val, no_set = solve(members)
            yes_val, yes_set = solve(members - g.neighbors(p))
            yes_val += g.weight(p)
            if yes_val > no_val:
                total += yes_val
                taken.append(p)
                taken.extend(yes_set)
            else:
                total += no_val
                taken.extend(no_set)
        return total, taken

    _, taken = solve(set(g.nodes))
    return _result(g, taken, calls)
