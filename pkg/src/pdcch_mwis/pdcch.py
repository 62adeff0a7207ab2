"""PDCCH candidate model, search-space hashing and the scheduling entry point."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import solvers
from .graph import WeightedGraph
from .solvers import GreedyMetric, GreedySeeded

AGGREGATION_LEVELS = (1, 2, 4, 8, 16)

# UE-specific search space hashing (TS 38.213, 10.1)
HASH_MODULUS = 65537
HASH_MULTIPLIERS = (39827, 39829, 39839)

OTG_MAX_M = 6


class PdcchError(ValueError):
    pass


class Direction(str, enum.Enum):
    DL = "DL"
    UL = "UL"


class Algorithm(str, enum.Enum):
    W_GREEDY = "w-greedy"
    WDR_GREEDY = "wdr-greedy"
    FR = "fr"
    EXACT = "exact"
    OTG = "otg"


def check_al(al: int) -> int:
    if al not in AGGREGATION_LEVELS:
        raise PdcchError(f"aggregation level must be one of {AGGREGATION_LEVELS}, got {al}")
    return al


@dataclass(frozen=True)
class CoresetConfig:
    id: int = 0
    n_cce: int = 32

    def __post_init__(self):
        if self.id < 0 or self.n_cce < 1:
            raise PdcchError(f"bad CORESET {self.id}: n_cce={self.n_cce}")


@dataclass(frozen=True)
class SearchSpaceConfig:
    candidates_per_al: dict[int, int] = field(default_factory=lambda: {1: 5, 2: 4, 4: 3, 8: 2})

    def n_candidates(self, al: int) -> int:
        return self.candidates_per_al.get(al, 0)

    def validate(self, coreset: CoresetConfig) -> None:
        for al, n in self.candidates_per_al.items():
            check_al(al)
            if n < 0 or (n > 0 and n > coreset.n_cce // al):
                raise PdcchError(f"{n} candidates at AL {al} do not fit {coreset.n_cce} CCEs")


@dataclass(frozen=True)
class UEConfig:
    ue_id: int
    rnti: int
    al: int
    weight_ul: float = 0.0
    weight_dl: float = 0.0
    directions_active: frozenset[Direction] | None = None
    coresets: tuple[int, ...] | None = None

    def __post_init__(self):
        check_al(self.al)
        if self.rnti <= 0:
            raise PdcchError(f"UE {self.ue_id}: rnti must be a positive integer")
        if self.directions_active is None:
            active = {d for d in Direction if self.weight(d) > 0}
            object.__setattr__(self, "directions_active", frozenset(active))

    def weight(self, direction: Direction) -> float:
        return self.weight_dl if direction is Direction.DL else self.weight_ul


@dataclass(frozen=True)
class Candidate:
    id: int
    ue_id: int
    direction: Direction
    al: int
    start_cce: int
    coreset_id: int = 0

    @property
    def end_cce(self) -> int:
        return self.start_cce + self.al

    @property
    def key(self) -> tuple[int, Direction]:
        return self.ue_id, self.direction

    def to_dict(self) -> dict:
        return {
            "ue_id": self.ue_id,
            "direction": self.direction.value,
            "start_cce": self.start_cce,
            "al": self.al,
            "coreset_id": self.coreset_id,
        }


@dataclass
class Selection:
    chosen: list[int]
    objective: float

    def to_dict(self, candidates: Sequence[Candidate]) -> dict:
        return {"chosen": [candidates[i].to_dict() for i in self.chosen], "objective": self.objective}


def hash_offset(rnti: int, slot: int, coreset_id: int = 0) -> int:
    """Y for ``slot``, from Y(-1) = rnti and Y(k) = A * Y(k-1) mod 65537."""
    if rnti == 0:
        raise PdcchError("rnti must be nonzero")
    a = HASH_MULTIPLIERS[coreset_id % 3]
    return pow(a, slot + 1, HASH_MODULUS) * rnti % HASH_MODULUS


def hash_starts(y: int, al: int, n_candidates: int, n_cce: int) -> list[int]:
    """Start CCEs for one AL, duplicates dropped (first occurrence kept)."""
    blocks = n_cce // al
    starts: list[int] = []
    for m in range(n_candidates):
        s = al * ((y + (m * n_cce) // (al * n_candidates)) % blocks)
        if s not in starts:
            starts.append(s)
    return starts


def hash_candidates(
    ue: UEConfig,
    ss: SearchSpaceConfig,
    coreset: CoresetConfig,
    slot: int,
    direction: Direction = Direction.DL,
    first_id: int = 0,
) -> list[Candidate]:
    ss.validate(coreset)
    y = hash_offset(ue.rnti, slot, coreset.id)
    starts = hash_starts(y, ue.al, ss.n_candidates(ue.al), coreset.n_cce)
    return [Candidate(first_id + i, ue.ue_id, direction, ue.al, s, coreset.id) for i, s in enumerate(starts)]


def generate_candidates(
    ues: Iterable[UEConfig],
    ss: SearchSpaceConfig,
    coresets: Sequence[CoresetConfig],
    slot: int,
) -> list[Candidate]:
    """All candidates of all active UE directions, with dense ids."""
    out: list[Candidate] = []
    for ue in ues:
        for direction in Direction:
            if direction not in ue.directions_active or not ue.weight(direction) > 0:
                continue
            for cs in coresets:
                if ue.coresets is not None and cs.id not in ue.coresets:
                    continue
                out.extend(hash_candidates(ue, ss, cs, slot, direction, len(out)))
    return out


def candidates_overlap(a: Candidate, b: Candidate) -> bool:
    return a.coreset_id == b.coreset_id and a.start_cce < b.end_cce and b.start_cce < a.end_cce


def _ue_map(ues: Iterable[UEConfig]) -> dict[int, UEConfig]:
    return {ue.ue_id: ue for ue in ues}


def candidate_weight(c: Candidate, ue_by_id: dict[int, UEConfig]) -> float:
    try:
        ue = ue_by_id[c.ue_id]
    except KeyError:
        raise PdcchError(f"candidate {c.id} refers to unknown UE {c.ue_id}") from None
    w = ue.weight(c.direction)
    if not (w > 0 and math.isfinite(w)) or c.direction not in ue.directions_active:
        raise PdcchError(f"candidate {c.id}: UE {c.ue_id} {c.direction.value} is inactive or has weight {w}")
    return w


def build_incompatibility_graph(candidates: Sequence[Candidate], ues: Iterable[UEConfig]) -> WeightedGraph:
    """Nodes are candidates; edges join candidates of one (UE, direction) or sharing a CCE."""
    ue_by_id = _ue_map(ues)
    same_ue: dict[tuple, set[int]] = defaultdict(set)
    on_cce: dict[tuple[int, int], set[int]] = defaultdict(set)
    for i, c in enumerate(candidates):
        if c.id != i:
            raise PdcchError("candidate ids must be dense 0..n-1 in list order")
        same_ue[c.key].add(i)
        for k in range(c.start_cce, c.end_cce):
            on_cce[(c.coreset_id, k)].add(i)
    g = WeightedGraph()
    for c in candidates:
        g.add_node(c.id, candidate_weight(c, ue_by_id))
    for c in candidates:
        nbrs = same_ue[c.key].union(*(on_cce[(c.coreset_id, k)] for k in range(c.start_cce, c.end_cce)))
        nbrs.discard(c.id)
        g._adj[c.id] = nbrs
    return g


def objective(candidates: Sequence[Candidate], ues: Iterable[UEConfig], chosen: Iterable[int]) -> float:
    ue_by_id = _ue_map(ues)
    return math.fsum(candidate_weight(candidates[i], ue_by_id) for i in sorted(chosen))


def check_selection(candidates: Sequence[Candidate], ues: Iterable[UEConfig], sel: Selection, tol: float = 1e-9) -> bool:
    ues = list(ues)
    for i in sel.chosen:
        if not 0 <= i < len(candidates):
            raise PdcchError(f"unknown candidate id {i}")
    if len(set(sel.chosen)) != len(sel.chosen):
        return False
    picked = [candidates[i] for i in sel.chosen]
    if len({c.key for c in picked}) != len(picked):
        return False
    if any(candidates_overlap(a, b) for a, b in combinations(picked, 2)):
        return False
    return abs(objective(candidates, ues, sel.chosen) - sel.objective) <= tol


def w_greedy_direct(candidates: Sequence[Candidate], ues: Iterable[UEConfig]) -> Selection:
    """Weight-ordered greedy on CCE occupancy bitmaps, without building a graph."""
    ue_by_id = _ue_map(ues)
    weight = [candidate_weight(c, ue_by_id) for c in candidates]
    occupied: dict[int, int] = defaultdict(int)
    served: set[tuple] = set()
    chosen = []
    for i in sorted(range(len(candidates)), key=lambda i: (-weight[i], i)):
        c = candidates[i]
        mask = ((1 << c.al) - 1) << c.start_cce
        if c.key in served or occupied[c.coreset_id] & mask:
            continue
        occupied[c.coreset_id] |= mask
        served.add(c.key)
        chosen.append(i)
    chosen.sort()
    return Selection(chosen, math.fsum(weight[i] for i in chosen))


def otg_rank(candidates: Sequence[Candidate], ues: Iterable[UEConfig]) -> list[tuple[int, Direction]]:
    """UE-direction pairs by w/AL descending; ties to lower ue_id, then DL before UL."""
    ue_by_id = _ue_map(ues)
    pairs = {c.key: ue_by_id[c.ue_id].weight(c.direction) / c.al for c in candidates}
    dir_rank = {Direction.DL: 0, Direction.UL: 1}
    return sorted(pairs, key=lambda k: (-pairs[k], k[0], dir_rank[k[1]]))


def otg_schedule(
    candidates: Sequence[Candidate],
    ues: Iterable[UEConfig],
    m: int = 4,
    graph: WeightedGraph | None = None,
) -> Selection:
    """Exact MWIS on the top-``m`` UE-directions by w/AL, then w/AL greedy on the rest."""
    if m < 1:
        raise PdcchError("OtG needs M >= 1")
    if m > OTG_MAX_M:
        raise PdcchError(f"OtG M={m} exceeds the practical limit {OTG_MAX_M}")
    ues = list(ues)
    g = build_incompatibility_graph(candidates, ues) if graph is None else graph
    top = set(otg_rank(candidates, ues)[:m])
    head = [c.id for c in candidates if c.key in top]
    fixed = solvers.exact_recursion(g.subgraph(head), max_nodes=None).selected
    rest = g.copy()
    for v in fixed:
        rest.remove_closed_neighborhood(v)
    for v in head:
        if v in rest:
            rest.remove_node(v)
    score = {v: g.weight(v) / candidates[v].al for v in rest.nodes}
    tail = solvers.static_greedy(rest, score).selected
    chosen = sorted(fixed | tail)
    return Selection(chosen, objective(candidates, ues, chosen))


def schedule(
    candidates: Sequence[Candidate],
    ues: Iterable[UEConfig],
    algorithm: Algorithm | str,
    graph: WeightedGraph | None = None,
    otg_m: int = 4,
    exact_max_nodes: int | None = solvers.EXACT_MAX_NODES,
) -> Selection:
    algorithm = Algorithm(algorithm)
    ues = list(ues)
    if algorithm is Algorithm.OTG:
        return otg_schedule(candidates, ues, otg_m, graph)
    g = build_incompatibility_graph(candidates, ues) if graph is None else graph
    if algorithm is Algorithm.W_GREEDY:
        res = solvers.greedy(g, GreedyMetric.WEIGHT)
    elif algorithm is Algorithm.WDR_GREEDY:
        res = solvers.greedy(g, GreedyMetric.WDR)
    elif algorithm is Algorithm.FR:
        res = solvers.fr_solve(g, GreedySeeded())
    else:
        res = solvers.exact_recursion(g, max_nodes=exact_max_nodes)
    return Selection(sorted(res.selected), res.value)


@dataclass
class PdcchInstance:
    coresets: list[CoresetConfig]
    ues: list[UEConfig]
    slot: int
    search_space: SearchSpaceConfig
    candidates: list[Candidate]


def parse_instance(data: dict) -> PdcchInstance:
    """Build an instance from the candidate-set JSON object."""
    try:
        coresets = [CoresetConfig(int(c["id"]), int(c["n_cce"])) for c in data["coresets"]]
        ss = SearchSpaceConfig({int(k): int(v) for k, v in data.get("candidates_per_al", {1: 5, 2: 4, 4: 3, 8: 2}).items()})
        ues = []
        for u in data["ues"]:
            cs = u.get("coresets")
            ues.append(
                UEConfig(
                    ue_id=int(u["ue_id"]),
                    rnti=int(u["rnti"]),
                    al=int(u["al"]),
                    weight_ul=float(u.get("weight_ul", 0.0)),
                    weight_dl=float(u.get("weight_dl", 0.0)),
                    coresets=None if cs is None else tuple(int(x) for x in cs),
                )
            )
        slot = int(data.get("slot", 0))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PdcchError):
            raise
        raise PdcchError(f"malformed PDCCH instance: {exc!r}") from None
    if len({ue.ue_id for ue in ues}) != len(ues):
        raise PdcchError("duplicate ue_id")
    for cs in coresets:
        ss.validate(cs)
    return PdcchInstance(coresets, ues, slot, ss, generate_candidates(ues, ss, coresets, slot))


def selection_from_dict(data: dict, candidates: Sequence[Candidate]) -> Selection:
    """Map an emitted selection back onto candidate ids."""
    index = {(c.ue_id, c.direction, c.start_cce, c.al, c.coreset_id): c.id for c in candidates}
    chosen = []
    for item in data["chosen"]:
        key = (int(item["ue_id"]), Direction(item["direction"]), int(item["start_cce"]), int(item["al"]), int(item.get("coreset_id", 0)))
        if key not in index:
            raise PdcchError(f"selection refers to unknown candidate {item}")
        chosen.append(index[key])
    return Selection(sorted(chosen), float(data["objective"]))


def random_instance(
    rng,
    n_ues: int,
    n_cce: int = 32,
    ss: SearchSpaceConfig | None = None,
    al_pool: Sequence[int] = (1, 2, 4, 8),
    slot: int | None = None,
    uplink: bool = False,
) -> PdcchInstance:
    """Random single-CORESET instance; ``rng`` is a numpy Generator."""
    ss = ss or SearchSpaceConfig()
    coreset = CoresetConfig(0, n_cce)
    slot = int(rng.integers(0, 20)) if slot is None else slot
    rntis = rng.choice(np.arange(1, 65520), size=n_ues, replace=False)
    ues = []
    for u in range(n_ues):
        ues.append(
            UEConfig(
                ue_id=u,
                rnti=int(rntis[u]),
                al=int(rng.choice(al_pool)),
                weight_dl=float(rng.uniform(0.1, 10.0)),
                weight_ul=float(rng.uniform(0.1, 10.0)) if uplink and rng.random() < 0.5 else 0.0,
            )
        )
    return PdcchInstance([coreset], ues, slot, ss, generate_candidates(ues, ss, [coreset], slot))
