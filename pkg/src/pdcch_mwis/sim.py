"""Multi-slot PDCCH scheduling simulator with proportional-fair weights.

Each scenario draws UE aggregation levels, RNTIs and Poisson traffic once;
every algorithm then replays the same draws (common random numbers).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import rng as rngmod
from .pdcch import (
    Algorithm,
    Candidate,
    CoresetConfig,
    Direction,
    SearchSpaceConfig,
    Selection,
    UEConfig,
    build_incompatibility_graph,
    hash_offset,
    hash_starts,
    schedule,
    w_greedy_direct,
)

log = logging.getLogger(__name__)

EPS = 1e-6
RES_PER_PRB = 12
REFERENCE = Algorithm.WDR_GREEDY
DEFAULT_ALGORITHMS = (Algorithm.W_GREEDY, Algorithm.OTG, Algorithm.WDR_GREEDY, Algorithm.FR)


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    n_ues: int = 30
    n_slots: int = 300
    n_scenarios: int = 100
    seed: int = 2024
    al_pool: tuple[int, ...] = (1, 2, 4, 8)
    candidates_per_al: dict[int, int] = field(default_factory=lambda: {1: 5, 2: 4, 4: 3, 8: 2})
    n_cce: int = 32
    traffic_rate_bytes_per_slot: float = 6000.0
    pdsch_prbs_per_slot: int = 100
    pf_time_constant_slots: float = 50.0
    se_scale: float = 8.0
    otg_m: int = 4

    def __post_init__(self):
        self.al_pool = tuple(int(a) for a in self.al_pool)
        self.candidates_per_al = {int(k): int(v) for k, v in self.candidates_per_al.items()}
        self.validate()

    def validate(self) -> None:
        if self.n_ues < 1 or self.n_scenarios < 1 or self.n_slots < 0:
            raise ConfigError("n_ues and n_scenarios must be positive, n_slots non-negative")
        if not self.traffic_rate_bytes_per_slot > 0:
            raise ConfigError("traffic rate must be positive")
        if self.pf_time_constant_slots < 1:
            raise ConfigError("PF time constant must be >= 1 slot")
        if self.pdsch_prbs_per_slot < 1 or self.n_cce < 1 or not self.se_scale > 0:
            raise ConfigError("PRBs, CCEs and SE scale must be positive")
        if not self.al_pool:
            raise ConfigError("al_pool is empty")
        try:
            SearchSpaceConfig(self.candidates_per_al).validate(CoresetConfig(0, self.n_cce))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for al in self.al_pool:
            if al > self.n_cce:
                raise ConfigError(f"AL {al} does not fit {self.n_cce} CCEs")

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["al_pool"] = list(self.al_pool)
        d["candidates_per_al"] = {str(k): v for k, v in self.candidates_per_al.items()}
        return d


@dataclass
class UEState:
    backlog_bytes: float = 0.0
    avg_throughput: float = EPS
    last_grant_slot: int | None = None
    grant_gaps: list[int] = field(default_factory=list)
    bytes_served_total: float = 0.0
    bytes_arrived_total: float = 0.0


@dataclass
class ScenarioDraws:
    """Per-scenario random quantities, identical for every algorithm."""

    index: int
    als: list[int]
    rntis: list[int]
    arrivals: np.ndarray  # (n_slots, n_ues) bytes
    _starts: dict[int, list[list[int]]] = field(default_factory=dict, repr=False)

    def starts(self, slot: int, cfg: ScenarioConfig) -> list[list[int]]:
        if slot not in self._starts:
            self._starts[slot] = [
                hash_starts(hash_offset(rnti, slot), al, cfg.candidates_per_al.get(al, 0), cfg.n_cce)
                for rnti, al in zip(self.rntis, self.als)
            ]
        return self._starts[slot]


@dataclass
class SlotResult:
    slot: int
    granted: list[int]
    selection: Selection
    runtime: float
    graph_time: float
    served: dict[int, float]
    shadow_objective: float | None = None
    candidates: list[Candidate] = field(default_factory=list, repr=False)
    ues: list[UEConfig] = field(default_factory=list, repr=False)


@dataclass
class MetricsReport:
    ues_per_slot: float = 0.0
    geomean_throughput: float = 0.0
    runtime_per_slot: float = 0.0
    inter_tx_slots: dict[int, float] = field(default_factory=dict)
    graph_time_per_slot: float = 0.0
    mean_objective: float = 0.0

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["inter_tx_slots"] = {str(k): v for k, v in self.inter_tx_slots.items()}
        return d


def spectral_efficiency(al: int, se_scale: float) -> float:
    if not se_scale > 0:
        raise ValueError("se_scale must be positive")
    return se_scale / al


def service_bytes(prbs: int, al: int, cfg: ScenarioConfig) -> float:
    return prbs * RES_PER_PRB * spectral_efficiency(al, cfg.se_scale) / 8.0


def achievable_rate(u: UEState, al: int, cfg: ScenarioConfig) -> float:
    return min(u.backlog_bytes, service_bytes(cfg.pdsch_prbs_per_slot, al, cfg))


def pf_weight(u: UEState, al: int, cfg: ScenarioConfig) -> float:
    if not u.backlog_bytes > 0:
        raise ValueError("PF weight requested for a UE with empty backlog")
    return achievable_rate(u, al, cfg) / max(u.avg_throughput, EPS)


def draw_scenario(cfg: ScenarioConfig, index: int) -> ScenarioDraws:
    al_rng = rngmod.make_rng(cfg.seed, index, rngmod.STREAM_ALS)
    als = [int(a) for a in al_rng.choice(np.array(cfg.al_pool), size=cfg.n_ues)]
    rntis = [1000 + index * cfg.n_ues + u for u in range(cfg.n_ues)]
    traffic_rng = rngmod.make_rng(cfg.seed, index, rngmod.STREAM_TRAFFIC)
    arrivals = rngmod.poisson(traffic_rng, cfg.traffic_rate_bytes_per_slot, (cfg.n_slots, cfg.n_ues))
    return ScenarioDraws(index, als, rntis, arrivals)


def _solve(algorithm: Algorithm, candidates, ues, cfg: ScenarioConfig):
    """Run one algorithm; returns (selection, solve seconds, graph build seconds)."""
    if algorithm is Algorithm.W_GREEDY:
        t0 = time.perf_counter()
        sel = w_greedy_direct(candidates, ues)
        return sel, time.perf_counter() - t0, 0.0
    t0 = time.perf_counter()
    g = build_incompatibility_graph(candidates, ues)
    t1 = time.perf_counter()
    sel = schedule(candidates, ues, algorithm, graph=g, otg_m=cfg.otg_m)
    return sel, time.perf_counter() - t1, t1 - t0


def step_slot(
    states: list[UEState],
    cfg: ScenarioConfig,
    algorithm: Algorithm,
    slot: int,
    draws: ScenarioDraws,
    shadow: Algorithm | None = None,
) -> SlotResult:
    """Advance one slot. ``shadow`` solves the same instance without acting on it."""
    arrivals = draws.arrivals[slot]
    for u, st in enumerate(states):
        a = float(arrivals[u])
        st.backlog_bytes += a
        st.bytes_arrived_total += a

    starts = draws.starts(slot, cfg)
    ues: list[UEConfig] = []
    candidates: list[Candidate] = []
    for u, st in enumerate(states):
        if st.backlog_bytes <= 0:
            continue
        al = draws.als[u]
        ues.append(UEConfig(u, draws.rntis[u], al, weight_dl=pf_weight(st, al, cfg)))
        for s in starts[u]:
            candidates.append(Candidate(len(candidates), u, Direction.DL, al, s, 0))

    sel, runtime, graph_time = _solve(algorithm, candidates, ues, cfg)
    shadow_obj = None if shadow is None else _solve(shadow, candidates, ues, cfg)[0].objective
    granted = sorted(candidates[i].ue_id for i in sel.chosen)

    served: dict[int, float] = {}
    if granted:
        base, extra = divmod(cfg.pdsch_prbs_per_slot, len(granted))
        for rank, u in enumerate(granted):
            st = states[u]
            prbs = base + (1 if rank < extra else 0)
            amount = min(st.backlog_bytes, service_bytes(prbs, draws.als[u], cfg))
            st.backlog_bytes -= amount
            st.bytes_served_total += amount
            served[u] = amount
            if st.last_grant_slot is not None:
                st.grant_gaps.append(slot - st.last_grant_slot)
            st.last_grant_slot = slot

    decay = 1.0 - 1.0 / cfg.pf_time_constant_slots
    for u, st in enumerate(states):
        st.avg_throughput = max(EPS, decay * st.avg_throughput + served.get(u, 0.0) / cfg.pf_time_constant_slots)
    return SlotResult(slot, granted, sel, runtime, graph_time, served, shadow_obj, candidates, ues)


def geomean_throughput(states: Sequence[UEState], n_slots: int) -> float:
    if n_slots == 0 or not states:
        return 0.0
    logs = [math.log(max(st.bytes_served_total, EPS * n_slots) / n_slots) for st in states]
    return math.exp(math.fsum(logs) / len(logs))


def inter_tx_by_al(states: Sequence[UEState], als: Sequence[int], pool: Iterable[int]) -> dict[int, float]:
    """Mean grant gap per AL over UEs with at least two grants (NaN if none)."""
    out = {}
    for al in pool:
        gaps = [statistics.fmean(st.grant_gaps) for st, a in zip(states, als) if a == al and st.grant_gaps]
        out[al] = statistics.fmean(gaps) if gaps else math.nan
    return out


def run_scenario(
    cfg: ScenarioConfig,
    algorithm: Algorithm | str,
    scenario_index: int,
    draws: ScenarioDraws | None = None,
    shadow: Algorithm | None = None,
    trace: list[SlotResult] | None = None,
) -> MetricsReport:
    algorithm = Algorithm(algorithm)
    if draws is None:
        draws = draw_scenario(cfg, scenario_index)
    if cfg.n_slots == 0:
        return MetricsReport(inter_tx_slots={al: math.nan for al in cfg.al_pool})
    states = [UEState() for _ in range(cfg.n_ues)]
    grants = 0
    runtimes, graph_times, objectives = [], [], []
    for slot in range(cfg.n_slots):
        res = step_slot(states, cfg, algorithm, slot, draws, shadow)
        grants += len(res.granted)
        runtimes.append(res.runtime)
        graph_times.append(res.graph_time)
        objectives.append(res.selection.objective)
        if trace is not None:
            trace.append(res)
    return MetricsReport(
        ues_per_slot=grants / cfg.n_slots,
        geomean_throughput=geomean_throughput(states, cfg.n_slots),
        runtime_per_slot=statistics.median(runtimes),
        inter_tx_slots=inter_tx_by_al(states, draws.als, cfg.al_pool),
        graph_time_per_slot=statistics.median(graph_times),
        mean_objective=statistics.fmean(objectives),
    )


def _run_one(args) -> tuple[int, dict[Algorithm, MetricsReport]]:
    cfg, algorithms, index = args
    draws = draw_scenario(cfg, index)
    return index, {alg: run_scenario(cfg, alg, index, draws) for alg in algorithms}


def _nanmean(values: Iterable[float]) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return statistics.fmean(vals) if vals else math.nan


@dataclass
class CampaignResult:
    cfg: ScenarioConfig
    algorithms: list[Algorithm]
    per_scenario: dict[Algorithm, list[MetricsReport]]
    summary: dict[Algorithm, MetricsReport]
    geomean_norm: dict[Algorithm, float]
    runtime_norm: dict[Algorithm, float]

    CSV_FIELDS = ("algorithm", "ues_per_slot", "geomean_norm", "runtime_norm")
    RUNTIME_FIELDS = ("runtime_norm",)

    def rows(self) -> list[dict]:
        out = []
        for alg in self.algorithms:
            s = self.summary[alg]
            row = {
                "algorithm": alg.value,
                "ues_per_slot": s.ues_per_slot,
                "geomean_norm": self.geomean_norm[alg],
                "runtime_norm": self.runtime_norm[alg],
            }
            for al in self.cfg.al_pool:
                row[f"intertx_al{al}"] = s.inter_tx_slots[al]
            out.append(row)
        return out

    def fieldnames(self) -> list[str]:
        return list(self.CSV_FIELDS) + [f"intertx_al{al}" for al in self.cfg.al_pool]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.fieldnames(), lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: v if isinstance(v, str) else f"{v:.6f}" for k, v in row.items()})
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "config": self.cfg.to_dict(),
            "reference": REFERENCE.value,
            "table": self.rows(),
            "summary": {alg.value: self.summary[alg].to_dict() for alg in self.summary},
            "scenarios": {alg.value: [r.to_dict() for r in reps] for alg, reps in self.per_scenario.items()},
        }

    def format_table(self) -> str:
        names = self.fieldnames()
        lines = ["  ".join(f"{n:>12}" for n in names)]
        for row in self.rows():
            lines.append("  ".join(f"{row[n]:>12}" if isinstance(row[n], str) else f"{row[n]:>12.3f}" for n in names))
        return "\n".join(lines)


def run_campaign(
    cfg: ScenarioConfig,
    algorithms: Sequence[Algorithm | str] = DEFAULT_ALGORITHMS,
    workers: int = 1,
) -> CampaignResult:
    """Run every scenario under every algorithm and build the summary table.

    Geomean throughput and runtime are normalised by the WDR-greedy row,
    which is simulated even when it is not among ``algorithms``.
    """
    algorithms = [Algorithm(a) for a in algorithms]
    if not algorithms:
        raise ConfigError("no algorithms requested")
    run_algs = list(dict.fromkeys(algorithms + [REFERENCE]))
    jobs = [(cfg, run_algs, i) for i in range(cfg.n_scenarios)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_run_one, jobs))
    else:
        results = {}
        for job in jobs:
            idx, reps = _run_one(job)
            results[idx] = reps
            log.debug("scenario %d done", idx)

    per_scenario = {alg: [results[i][alg] for i in range(cfg.n_scenarios)] for alg in run_algs}
    summary = {}
    for alg, reps in per_scenario.items():
        summary[alg] = MetricsReport(
            ues_per_slot=statistics.fmean(r.ues_per_slot for r in reps),
            geomean_throughput=statistics.fmean(r.geomean_throughput for r in reps),
            runtime_per_slot=statistics.fmean(r.runtime_per_slot for r in reps),
            inter_tx_slots={al: _nanmean(r.inter_tx_slots[al] for r in reps) for al in cfg.al_pool},
            graph_time_per_slot=statistics.fmean(r.graph_time_per_slot for r in reps),
            mean_objective=statistics.fmean(r.mean_objective for r in reps),
        )
    ref = summary[REFERENCE]

    def ratio(a: float, b: float) -> float:
        return a / b if b > 0 else math.nan

    geo = {alg: ratio(summary[alg].geomean_throughput, ref.geomean_throughput) for alg in run_algs}
    rt = {alg: ratio(summary[alg].runtime_per_slot, ref.runtime_per_slot) for alg in run_algs}
    if REFERENCE not in algorithms:
        for d in (per_scenario, summary, geo, rt):
            del d[REFERENCE]
    return CampaignResult(cfg, algorithms, per_scenario, summary, geo, rt)


def load_config(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return ScenarioConfig.from_dict(data)
