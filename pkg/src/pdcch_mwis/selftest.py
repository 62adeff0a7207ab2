"""Seeded oracle-equivalence and guarantee checks behind ``pdcch-mwis selftest``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from . import solvers
from .graph import brute_force_mwis, build_graph, is_independent_set, random_forest, random_graph
from .pdcch import Algorithm, check_selection, hash_offset, hash_starts, random_instance, schedule

SELFTEST_SEED = 20240611
TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list[str] = field(default_factory=list)

    def check(self, ok: bool, what: str) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 5:
                self.failures.append(what)


def _fixtures(res: SuiteResult) -> None:
    star = build_graph([10, 4, 4, 4], [(0, 1), (0, 2), (0, 3)])
    tri = build_graph([5, 4, 3], [(0, 1), (1, 2), (0, 2)])
    res.check(solvers.greedy(star).value == 10.0, "star wdr-greedy != 10")
    res.check(solvers.exact_recursion(star).value == 12.0, "star exact != 12")
    res.check(solvers.greedy_lower_bound(star) == 8.5, "star bound != 8.5")
    res.check(solvers.greedy(tri).value == 5.0, "triangle wdr-greedy != 5")
    res.check(solvers.forest_mwis(build_graph([1, 3, 1], [(0, 1), (1, 2)])).value == 3.0, "path(1,3,1) != 3")
    res.check(solvers.forest_mwis(build_graph([2, 3, 2], [(0, 1), (1, 2)])).value == 4.0, "path(2,3,2) != 4")
    # equal metrics: the lowest id must win
    pair = build_graph([1.0, 1.0], [(0, 1)])
    res.check(solvers.greedy(pair).selected == {0}, "WDR tie-break on an edge")
    square = build_graph([3.0] * 4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    res.check(solvers.greedy(square).selected == {0, 2}, "WDR tie-break on a 4-cycle")
    res.check(solvers.greedy(pair, solvers.GreedyMetric.WEIGHT).selected == {0}, "W tie-break on an edge")
    res.check(hash_starts(hash_offset(17, 0), 4, 3, 32) == [4, 12, 24], "hash vector rnti=17 AL=4")


def _exact_vs_oracle(res: SuiteResult, rng: np.random.Generator, count: int) -> None:
    for k in range(count):
        g = random_graph(int(rng.integers(1, 15)), (0.1, 0.3, 0.6)[k % 3], rng)
        ref = brute_force_mwis(g)[1]
        got = solvers.exact_recursion(g)
        res.check(abs(got.value - ref) <= TOL and is_independent_set(g, got.selected), f"exact graph #{k}")


def _forest_vs_oracle(res: SuiteResult, rng: np.random.Generator, count: int) -> None:
    for k in range(count):
        g = random_forest(int(rng.integers(1, 15)), rng)
        res.check(abs(solvers.forest_mwis(g).value - brute_force_mwis(g)[1]) <= TOL, f"forest #{k}")


def _guarantees(res: SuiteResult, rng: np.random.Generator, count: int) -> None:
    for k in range(count):
        g = random_graph(int(rng.integers(1, 60)), float(rng.uniform(0.02, 0.5)), rng)
        gr = solvers.greedy(g)
        fr = solvers.fr_solve(g)
        res.check(gr.value >= solvers.greedy_lower_bound(g), f"greedy bound graph #{k}")
        res.check(fr.value >= gr.value, f"FR dominance graph #{k}")
        res.check(is_independent_set(g, fr.selected), f"FR independence graph #{k}")


def _pdcch_fuzz(res: SuiteResult, rng: np.random.Generator, count: int) -> None:
    for k in range(count):
        inst = random_instance(rng, int(rng.integers(1, 41)), uplink=k % 2 == 1)
        for alg in (Algorithm.W_GREEDY, Algorithm.WDR_GREEDY, Algorithm.FR, Algorithm.OTG):
            sel = schedule(inst.candidates, inst.ues, alg)
            res.check(check_selection(inst.candidates, inst.ues, sel), f"{alg.value} instance #{k}")


SUITES: list[tuple[str, Callable, int]] = [
    ("fixtures", lambda r, rng, n: _fixtures(r), 0),
    ("exact-vs-oracle", _exact_vs_oracle, 60),
    ("forest-vs-oracle", _forest_vs_oracle, 60),
    ("greedy-guarantees", _guarantees, 200),
    ("pdcch-feasibility", _pdcch_fuzz, 60),
]


def run_selftest(out: TextIO, seed: int = SELFTEST_SEED) -> int:
    total_fail = 0
    for i, (name, fn, count) in enumerate(SUITES):
        res = SuiteResult(name)
        fn(res, np.random.default_rng([seed, i]), count)
        status = "PASS" if res.failed == 0 else "FAIL"
        print(f"{status} {name}: {res.passed} passed, {res.failed} failed", file=out)
        for f in res.failures:
            print(f"    {f}", file=out)
        total_fail += res.failed
    print("selftest " + ("passed" if total_fail == 0 else f"FAILED ({total_fail} checks)"), file=out)
    return 0 if total_fail == 0 else 1
