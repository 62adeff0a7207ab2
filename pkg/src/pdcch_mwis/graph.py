"""Node-weighted undirected graphs and a brute-force MWIS oracle."""

from __future__ import annotations

import itertools
import json
import math
from typing import Iterable

import numpy as np

ORACLE_MAX_NODES = 25
_ORACLE_CHUNK = 1 << 18


class GraphError(ValueError):
    pass


class NodeRangeError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class WeightError(GraphError):
    pass


class MissingNodeError(GraphError, KeyError):
    pass


class OracleSizeError(GraphError):
    pass


class WeightedGraph:
    """Undirected graph with strictly positive node weights.

    Node ids are integers that stay fixed for the lifetime of the instance;
    removing a node never renumbers the others.
    """

    __slots__ = ("_weight", "_adj")

    def __init__(self) -> None:
        self._weight: dict[int, float] = {}
        self._adj: dict[int, set[int]] = {}

    def __len__(self) -> int:
        return len(self._weight)

    def __contains__(self, node: int) -> bool:
        return node in self._weight

    def __repr__(self) -> str:
        return f"WeightedGraph(n={len(self)}, m={self.n_edges})"

    @property
    def nodes(self) -> list[int]:
        return sorted(self._weight)

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self._adj.values()) // 2

    def edges(self) -> list[tuple[int, int]]:
        return sorted((a, b) for a, nbrs in self._adj.items() for b in nbrs if a < b)

    def weight(self, node: int) -> float:
        try:
            return self._weight[node]
        except KeyError:
            raise MissingNodeError(f"node {node} not in graph") from None

    def weights(self) -> dict[int, float]:
        return dict(self._weight)

    def neighbors(self, node: int) -> set[int]:
        try:
            return self._adj[node]
        except KeyError:
            raise MissingNodeError(f"node {node} not in graph") from None

    def degree(self, node: int) -> int:
        return len(self.neighbors(node))

    def add_node(self, node: int, weight: float) -> None:
        if node in self._weight:
            raise GraphError(f"node {node} already present")
        _check_weight(node, weight)
        self._weight[node] = float(weight)
        self._adj[node] = set()

    def add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise SelfLoopError(f"self-loop on node {a}")
        self.neighbors(a).add(b)
        self.neighbors(b).add(a)

    def remove_node(self, node: int) -> None:
        for nbr in self.neighbors(node):
            self._adj[nbr].discard(node)
        del self._adj[node]
        del self._weight[node]

    def remove_closed_neighborhood(self, node: int) -> set[int]:
        """Drop ``node`` and its neighbours in place; return the removed ids."""
        gone = set(self.neighbors(node))
        gone.add(node)
        for v in gone:
            for nbr in self._adj[v]:
                if nbr not in gone:
                    self._adj[nbr].discard(v)
        for v in gone:
            del self._adj[v]
            del self._weight[v]
        return gone

    def copy(self) -> WeightedGraph:
        g = WeightedGraph()
        g._weight = dict(self._weight)
        g._adj = {v: set(nbrs) for v, nbrs in self._adj.items()}
        return g

    def subgraph(self, nodes: Iterable[int]) -> WeightedGraph:
        """Induced subgraph; node ids are preserved."""
        keep = set(nodes)
        missing = keep - self._weight.keys()
        if missing:
            raise MissingNodeError(f"nodes {sorted(missing)} not in graph")
        g = WeightedGraph()
        g._weight = {v: self._weight[v] for v in keep}
        g._adj = {v: self._adj[v] & keep for v in keep}
        return g

    def scaled(self, factor: float) -> WeightedGraph:
        g = self.copy()
        for v in g._weight:
            g._weight[v] *= factor
        return g

    def check_invariants(self) -> None:
        for v, nbrs in self._adj.items():
            if v in nbrs:
                raise SelfLoopError(f"self-loop on node {v}")
            for u in nbrs:
                if v not in self._adj.get(u, ()):
                    raise GraphError(f"asymmetric edge ({v}, {u})")
        for v, w in self._weight.items():
            _check_weight(v, w)

    def to_dict(self) -> dict:
        """Graph JSON form; only valid when node ids are dense 0..n-1."""
        ids = self.nodes
        if ids != list(range(len(ids))):
            raise GraphError("graph JSON needs dense node ids")
        return {"weights": [self._weight[v] for v in ids], "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_dict(cls, data: dict) -> WeightedGraph:
        if not isinstance(data, dict) or "weights" not in data:
            raise GraphError("graph JSON needs a 'weights' array")
        edges = data.get("edges", [])
        try:
            pairs = [(int(a), int(b)) for a, b in edges]
        except (TypeError, ValueError):
            raise GraphError("edges must be [i, j] pairs") from None
        return build_graph(list(data["weights"]), pairs)


def _check_weight(node: int, weight: float) -> None:
    try:
        ok = weight > 0 and math.isfinite(weight)
    except TypeError:
        ok = False
    if not ok:
        raise WeightError(f"node {node} has non-positive or non-finite weight {weight!r}")


def build_graph(node_weights: list[float], edges: Iterable[tuple[int, int]]) -> WeightedGraph:
    g = WeightedGraph()
    for i, w in enumerate(node_weights):
        g.add_node(i, w)
    n = len(node_weights)
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n):
            raise NodeRangeError(f"edge ({a}, {b}) out of range for {n} nodes")
        if a == b:
            raise SelfLoopError(f"self-loop on node {a}")
        g.add_edge(a, b)
    return g


def load_graph(text: str) -> WeightedGraph:
    return WeightedGraph.from_dict(json.loads(text))


def remove_closed_neighborhood(g: WeightedGraph, c: int) -> WeightedGraph:
    g.remove_closed_neighborhood(c)
    return g


def _check_members(g: WeightedGraph, s: Iterable[int]) -> set[int]:
    members = set(s)
    for v in members:
        if v not in g:
            raise MissingNodeError(f"node {v} not in graph")
    return members


def is_independent_set(g: WeightedGraph, s: Iterable[int]) -> bool:
    members = _check_members(g, s)
    return all(not (g.neighbors(v) & members) for v in members)


def set_weight(g: WeightedGraph, s: Iterable[int]) -> float:
    members = _check_members(g, s)
    return math.fsum(g.weight(v) for v in sorted(members))


def brute_force_mwis(g: WeightedGraph) -> tuple[set[int], float]:
    """Exhaustive MWIS over all 2**n node subsets.

    Among optimal subsets the one with fewest members wins, then the
    lexicographically smallest sorted id tuple.
    """
    ids = g.nodes
    n = len(ids)
    if n > ORACLE_MAX_NODES:
        raise OracleSizeError(f"oracle limited to {ORACLE_MAX_NODES} nodes, got {n}")
    if n == 0:
        return set(), 0.0
    pos = {v: i for i, v in enumerate(ids)}
    w = np.array([g.weight(v) for v in ids])
    edge_pos = [(pos[a], pos[b]) for a, b in g.edges()]

    best = -1.0
    best_masks: list[int] = []
    total = 1 << n
    for start in range(0, total, _ORACLE_CHUNK):
        masks = np.arange(start, min(total, start + _ORACLE_CHUNK), dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
        ok = np.ones(len(masks), dtype=bool)
        for i, j in edge_pos:
            ok &= ~(bits[:, i] & bits[:, j])
        vals = np.where(ok, bits @ w, -1.0)
        top = vals.max()
        if top > best:
            best, best_masks = float(top), masks[vals == top].tolist()
        elif top == best:
            best_masks.extend(masks[vals == top].tolist())

    def tie_key(mask: int) -> tuple[int, tuple[int, ...]]:
        members = tuple(i for i in range(n) if mask >> i & 1)
        return len(members), members

    chosen = min(best_masks, key=tie_key)
    selected = {ids[i] for i in range(n) if chosen >> i & 1}
    return selected, set_weight(g, selected)


def random_graph(n: int, density: float, rng: np.random.Generator, low: float = 0.5, high: float = 10.0) -> WeightedGraph:
    """Erdos-Renyi G(n, p) with uniform float weights."""
    weights = rng.uniform(low, high, size=n).tolist()
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < density]
    return build_graph(weights, edges)


def random_forest(n: int, rng: np.random.Generator, p_attach: float = 0.8, low: float = 0.5, high: float = 10.0) -> WeightedGraph:
    """Random forest: each node joins an earlier node with probability ``p_attach``."""
    weights = rng.uniform(low, high, size=n).tolist()
    edges = [(int(rng.integers(i)), i) for i in range(1, n) if rng.random() < p_attach]
    return build_graph(weights, edges)
