import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdcch_mwis import solvers
from pdcch_mwis.graph import brute_force_mwis, build_graph, is_independent_set, random_forest, random_graph, set_weight
from pdcch_mwis.solvers import (
    CycleError,
    GreedyMetric,
    GreedySeeded,
    OrderError,
    SizeGuardError,
    UniformRandom,
    exact_recursion,
    forest_dp,
    forest_mwis,
    fr_extract_forest,
    fr_order,
    fr_solve,
    greedy,
    greedy_lower_bound,
    is_forest,
)

ALL_SOLVERS = {
    "w-greedy": lambda g: greedy(g, GreedyMetric.WEIGHT),
    "wdr-greedy": lambda g: greedy(g, GreedyMetric.WDR),
    "fr-seeded": lambda g: fr_solve(g, GreedySeeded()),
    "fr-random": lambda g: fr_solve(g, UniformRandom(7)),
    "exact": lambda g: exact_recursion(g),
}


def _random_graphs(seed, count, n_max, densities=(0.05, 0.1, 0.3, 0.6)):
    rng = np.random.default_rng(seed)
    return [random_graph(int(rng.integers(1, n_max + 1)), densities[k % len(densities)], rng) for k in range(count)]


def test_greedy_star(star):
    # WDR metrics: centre 10/4=2.5, leaves 4/2=2.0 -> centre first, everything else removed
    res = greedy(star, GreedyMetric.WDR)
    assert res.selected == {0} and res.value == 10
    assert greedy_lower_bound(star) == 8.5 <= res.value


def test_greedy_triangle(triangle):
    res = greedy(triangle, GreedyMetric.WDR)
    assert res.selected == {0} and res.value == 5


@pytest.mark.parametrize("metric", list(GreedyMetric))
def test_greedy_empty(metric):
    res = greedy(build_graph([], []), metric)
    assert res.selected == set() and res.value == 0


def test_greedy_weight_metric_ignores_degree(star):
    assert greedy(star, GreedyMetric.WEIGHT).selected == {0}
    g = build_graph([3, 4, 3], [(0, 1), (1, 2)])
    assert greedy(g, GreedyMetric.WEIGHT).selected == {1}
    # WDR: 3/2 = 1.5 beats 4/3
    assert greedy(g, GreedyMetric.WDR).selected == {0, 2}


def test_wdr_recomputed_on_residual_graph():
    # initial metrics: node 3 = 2/3 < node 4 = 1.5/2; node 0 (6/3) goes first and takes node 1 with it,
    # so node 3 drops to 2/2 = 1.0 and now beats node 4
    g = build_graph([6, 1, 1, 2, 1.5], [(0, 1), (0, 2), (3, 4), (1, 3)])
    assert greedy(g).selected == {0, 3}


def test_greedy_ties_lowest_id():
    assert greedy(build_graph([1, 1], [(0, 1)])).selected == {0}
    cycle = build_graph([3] * 4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert greedy(cycle).selected == {0, 2}


def test_greedy_lower_bound_fixtures(star, triangle):
    assert greedy_lower_bound(star) == 8.5
    assert greedy_lower_bound(triangle) == 4.0
    assert greedy_lower_bound(build_graph([1, 2, 3], [])) == 6.0


def test_forest_paths(path3):
    # brute-force over 8 subsets
    assert forest_mwis(path3((1, 3, 1))).selected == {1}
    assert forest_mwis(path3((1, 3, 1))).value == 3
    assert forest_mwis(path3((2, 3, 2))).selected == {0, 2}
    assert forest_mwis(path3((2, 3, 2))).value == 4
    for w in ((1, 3, 1), (2, 3, 2)):
        assert brute_force_mwis(path3(w))[1] == forest_mwis(path3(w)).value


def test_forest_single_node():
    t = forest_dp(build_graph([7], []))
    assert t.yes_value[0] == 7 and t.no_value[0] == 0
    assert forest_mwis(build_graph([7], [])).value == 7


def test_forest_rejects_cycle(triangle):
    with pytest.raises(CycleError):
        forest_mwis(triangle)


def test_forest_dp_table_recurrences(rng):
    for _ in range(20):
        g = random_forest(int(rng.integers(1, 30)), rng)
        t = forest_dp(g)
        for v in g.nodes:
            assert t.yes_value[v] >= g.weight(v) and t.no_value[v] >= 0
        # roots carry the optimum
        total = sum(max(t.yes_value[r], t.no_value[r]) for r in t.roots)
        assert forest_mwis(g).value == pytest.approx(total, abs=1e-9)


def test_forest_long_path_no_recursion_limit():
    n = 20000
    g = build_graph([1.0] * n, [(i, i + 1) for i in range(n - 1)])
    assert forest_mwis(g).value == n // 2


def test_fr_extract_triangle(triangle):
    f = fr_extract_forest(triangle, [0, 1, 2])
    assert f.nodes == [0, 1] and f.edges() == [(0, 1)]


def test_fr_extract_star(star):
    f = fr_extract_forest(star, [1, 2, 3, 0])
    assert f.nodes == [1, 2, 3] and f.edges() == []


def test_fr_extract_edgeless_identity():
    g = build_graph([1, 2, 3, 4], [])
    f = fr_extract_forest(g, [3, 1, 0, 2])
    assert f.nodes == g.nodes and f.weights() == g.weights()


def test_fr_extract_rejects_bad_order(star):
    with pytest.raises(OrderError):
        fr_extract_forest(star, [0, 1, 2])
    with pytest.raises(OrderError):
        fr_extract_forest(star, [0, 1, 2, 2])


def test_fr_greedy_seeded_star(star):
    # greedy picks {0}; 0 enters first, each leaf then sees one accepted neighbour, so the forest is the whole star
    assert fr_order(star, GreedySeeded()) == [0, 1, 2, 3]
    forest = fr_extract_forest(star, fr_order(star, GreedySeeded()))
    assert forest.edges() == star.edges()
    res = fr_solve(star, GreedySeeded())
    assert res.value == brute_force_mwis(forest)[1] == 12
    assert res.value >= greedy(star).value


@pytest.mark.parametrize("ordering", [GreedySeeded(), UniformRandom(3)])
def test_fr_edgeless_and_empty(ordering):
    assert fr_solve(build_graph([1, 2, 3], []), ordering).value == 6
    assert fr_solve(build_graph([], []), ordering).value == 0


def test_fr_random_order_is_seeded(rng):
    g = random_graph(40, 0.2, rng)
    a = fr_solve(g, UniformRandom(11))
    assert a.selected == fr_solve(g, UniformRandom(11)).selected
    orders = {tuple(fr_order(g, UniformRandom(s))) for s in range(5)}
    assert len(orders) == 5


def test_exact_fixtures(star, triangle):
    assert exact_recursion(star).value == 12
    assert exact_recursion(triangle).value == 5
    assert exact_recursion(build_graph([], [])).value == 0


def test_exact_size_guard():
    g = build_graph([1.0] * 61, [])
    with pytest.raises(SizeGuardError):
        exact_recursion(g)
    assert exact_recursion(g, max_nodes=None).value == 61
    assert exact_recursion(g, max_nodes=100).value == 61


def test_solution_validity_large():
    for g in _random_graphs(1, 30, 200, densities=(0.01, 0.05, 0.2)):
        for name, solve in ALL_SOLVERS.items():
            if name == "exact":
                continue
            res = solve(g)
            assert is_independent_set(g, res.selected), name
            assert res.value == set_weight(g, res.selected)


def test_greedy_results_are_maximal():
    for g in _random_graphs(2, 50, 60):
        for metric in GreedyMetric:
            sel = greedy(g, metric).selected
            for v in g.nodes:
                if v not in sel:
                    assert g.neighbors(v) & sel, (metric, v)


def test_greedy_guarantee_random():
    for g in _random_graphs(4, 300, 100):
        assert greedy(g).value >= greedy_lower_bound(g)


def test_forest_exactness_random():
    rng = np.random.default_rng(5)
    for _ in range(100):
        g = random_forest(int(rng.integers(1, 19)), rng, p_attach=float(rng.uniform(0.3, 1.0)))
        assert forest_mwis(g).value == pytest.approx(brute_force_mwis(g)[1], abs=1e-9)


def test_exact_matches_oracle_random():
    for g in _random_graphs(6, 100, 14):
        ex = exact_recursion(g)
        assert ex.value == pytest.approx(brute_force_mwis(g)[1], abs=1e-9)
        assert is_independent_set(g, ex.selected)


def test_fr_dominance_and_acyclicity():
    for k, g in enumerate(_random_graphs(7, 200, 80)):
        assert fr_solve(g, GreedySeeded()).value >= greedy(g).value
        for ordering in (GreedySeeded(), UniformRandom(k)):
            f = fr_extract_forest(g, fr_order(g, ordering))
            assert is_forest(f)
            assert set(f.edges()) <= set(g.edges())


def test_determinism():
    for g in _random_graphs(8, 20, 60):
        for name, solve in ALL_SOLVERS.items():
            if name == "exact" and len(g) > 30:
                continue
            assert solve(g).selected == solve(g.copy()).selected


def test_solvers_do_not_mutate_input(star):
    before = (star.nodes, star.edges(), star.weights())
    for solve in ALL_SOLVERS.values():
        solve(star)
    assert (star.nodes, star.edges(), star.weights()) == before


def test_scale_invariance():
    for g in _random_graphs(9, 40, 30):
        scaled = g.scaled(7.3)
        for name, solve in ALL_SOLVERS.items():
            a, b = solve(g), solve(scaled)
            assert a.selected == b.selected, name
            assert b.value == pytest.approx(7.3 * a.value, rel=1e-12)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(1, 12),
    data=st.data(),
)
def test_exact_property(n, data):
    weights = data.draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = data.draw(st.lists(st.sampled_from(pairs), max_size=2 * n)) if pairs else []
    g = build_graph(weights, edges)
    assert exact_recursion(g).value == brute_force_mwis(g)[1]
    assert fr_solve(g).value >= greedy(g).value >= greedy_lower_bound(g) - 1e-12


def test_mutated_tiebreak_detected(monkeypatch):
    def highest_id(work):
        best_v, best_m = -1, -1.0
        for v, w in work._weight.items():
            m = w / (len(work._adj[v]) + 1)
            if m > best_m or (m == best_m and v > best_v):
                best_v, best_m = v, m
        return best_v

    monkeypatch.setattr(solvers, "_wdr_pick", highest_id)
    assert greedy(build_graph([1, 1], [(0, 1)])).selected == {1}
