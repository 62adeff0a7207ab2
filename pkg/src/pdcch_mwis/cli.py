"""Command-line interface.

Exit codes: 0 success, 1 failed verification or selftest, 2 bad input or
config, 3 infeasible or oversized exact solve.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import solvers
from .graph import GraphError, WeightedGraph, is_independent_set
from .pdcch import (
    Algorithm,
    PdcchError,
    build_incompatibility_graph,
    check_selection,
    parse_instance,
    random_instance,
    schedule,
)
from .sim import DEFAULT_ALGORITHMS, ConfigError, ScenarioConfig, load_config, run_campaign

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT) from None


def _algorithms(text: str) -> list[Algorithm]:
    try:
        return [Algorithm(a.strip()) for a in text.split(",") if a.strip()]
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None


def _solve_graph(g: WeightedGraph, args) -> dict:
    algo = Algorithm(args.algo)
    if algo is Algorithm.OTG:
        raise CliError("otg needs a PDCCH instance (it ranks UEs by w/AL)", EXIT_INPUT)
    if algo is Algorithm.W_GREEDY:
        res = solvers.greedy(g, solvers.GreedyMetric.WEIGHT)
    elif algo is Algorithm.WDR_GREEDY:
        res = solvers.greedy(g, solvers.GreedyMetric.WDR)
    elif algo is Algorithm.FR:
        order = solvers.UniformRandom(args.seed) if args.fr_order == "random" else solvers.GreedySeeded()
        res = solvers.fr_solve(g, order)
    else:
        res = solvers.exact_recursion(g, max_nodes=args.exact_max)
    if args.verify and not is_independent_set(g, res.selected):
        raise CliError("verification failed: result is not an independent set", EXIT_FAILED)
    return {"algorithm": algo.value, **res.to_dict()}


def _solve_pdcch(data: dict, args) -> dict:
    inst = parse_instance(data)
    sel = schedule(inst.candidates, inst.ues, args.algo, otg_m=args.otg_m, exact_max_nodes=args.exact_max)
    if args.verify and not check_selection(inst.candidates, inst.ues, sel):
        raise CliError("verification failed: selection violates overlap or one-per-UE constraints", EXIT_FAILED)
    return {"algorithm": args.algo, **sel.to_dict(inst.candidates)}


def cmd_solve(args) -> int:
    try:
        data = json.loads(_read(args.input))
    except json.JSONDecodeError as exc:
        raise CliError(f"input is not valid JSON: {exc}", EXIT_INPUT) from None
    if not isinstance(data, dict):
        raise CliError("input must be a JSON object", EXIT_INPUT)
    try:
        if "weights" in data or "edges" in data:
            out = _solve_graph(WeightedGraph.from_dict(data), args)
        elif "ues" in data or "coresets" in data:
            out = _solve_pdcch(data, args)
        else:
            raise CliError("cannot tell input kind: expected weights/edges or ues/coresets", EXIT_INPUT)
    except solvers.SizeGuardError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE) from None
    except (GraphError, PdcchError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    text = json.dumps(out, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(_read(args.config)) if args.config else ScenarioConfig()
        overrides = {k: v for k, v in (("seed", args.seed), ("n_scenarios", args.scenarios), ("n_slots", args.slots)) if v is not None}
        if args.otg_m is not None:
            overrides["otg_m"] = args.otg_m
        if overrides:
            cfg = ScenarioConfig.from_dict({**cfg.to_dict(), **overrides})
    except ConfigError as exc:
        raise CliError(f"config error: {exc}", EXIT_INPUT) from None
    algorithms = _algorithms(args.algorithms) if args.algorithms else list(DEFAULT_ALGORITHMS)
    result = run_campaign(cfg, algorithms, workers=args.workers)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(result.to_csv())
    out.with_suffix(".json").write_text(json.dumps(result.to_json(), indent=1, allow_nan=True) + "\n")
    if not args.no_plot:
        from .plotting import plot_campaign

        plot_campaign(result.rows(), cfg.al_pool, out.with_suffix(".png"))
    print(result.format_table())
    return EXIT_OK


def cmd_bench(args) -> int:
    """Median solve time on random PDCCH instances of growing UE count."""
    sizes = [int(s) for s in args.sizes.split(",")]
    algorithms = _algorithms(args.algorithms) if args.algorithms else [*DEFAULT_ALGORITHMS, Algorithm.EXACT]
    rows = []
    for n in sizes:
        rng = np.random.default_rng([args.seed, n])
        insts = [random_instance(rng, n) for _ in range(args.reps)]
        graphs = [build_incompatibility_graph(i.candidates, i.ues) for i in insts]
        for alg in algorithms:
            if alg is Algorithm.EXACT and max(len(g) for g in graphs) > args.exact_max:
                continue
            times, values = [], []
            for inst, g in zip(insts, graphs):
                t0 = time.perf_counter()
                sel = schedule(inst.candidates, inst.ues, alg, graph=g, otg_m=args.otg_m, exact_max_nodes=None)
                times.append(time.perf_counter() - t0)
                values.append(sel.objective)
            rows.append(
                {
                    "n_ues": n,
                    "algorithm": alg.value,
                    "mean_nodes": statistics.fmean(len(g) for g in graphs),
                    "median_runtime_s": statistics.median(times),
                    "mean_objective": statistics.fmean(values),
                }
            )
    fields = ["n_ues", "algorithm", "mean_nodes", "median_runtime_s", "mean_objective"]
    writer = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        out = Path(args.out)
        with out.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        if not args.no_plot:
            from .plotting import plot_bench

            plot_bench(rows, out.with_suffix(".png"))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import SELFTEST_SEED, run_selftest

    return run_selftest(sys.stdout, SELFTEST_SEED if args.seed is None else args.seed)


def build_parser() -> argparse.ArgumentParser:
    algo_names = [a.value for a in Algorithm]
    p = argparse.ArgumentParser(prog="pdcch-mwis", description="PDCCH candidate selection via maximum weighted independent set")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a graph JSON or PDCCH instance JSON")
    s.add_argument("input", help="input JSON file, or - for stdin")
    s.add_argument("--algo", choices=algo_names, default=Algorithm.WDR_GREEDY.value)
    s.add_argument("--otg-m", type=int, default=4, help="UE-directions solved exactly by otg (default 4)")
    s.add_argument("--fr-order", choices=["greedy", "random"], default="greedy")
    s.add_argument("--seed", type=int, default=0, help="seed for --fr-order random")
    s.add_argument("--exact-max", type=int, default=solvers.EXACT_MAX_NODES, help="node limit for exact")
    s.add_argument("--verify", action="store_true", help="re-check feasibility before printing")
    s.add_argument("--out", help="also write the JSON result here")
    s.set_defaults(func=cmd_solve)

    m = sub.add_parser("simulate", help="run a multi-scenario scheduling campaign")
    m.add_argument("config", nargs="?", help="scenario config JSON (defaults if omitted)")
    m.add_argument("--algorithms", help=f"comma list from {','.join(algo_names)}")
    m.add_argument("--seed", type=int)
    m.add_argument("--scenarios", type=int, help="override n_scenarios")
    m.add_argument("--slots", type=int, help="override n_slots")
    m.add_argument("--otg-m", type=int)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out", default="campaign.csv", help="CSV path; .json and .png are written alongside")
    m.add_argument("--no-plot", action="store_true")
    m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="runtime sweep over random PDCCH instances")
    b.add_argument("--sizes", default="5,10,20,30,40", help="comma list of UE counts")
    b.add_argument("--reps", type=int, default=20)
    b.add_argument("--algorithms")
    b.add_argument("--otg-m", type=int, default=4)
    b.add_argument("--exact-max", type=int, default=40, help="skip exact above this many nodes")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", help="also write CSV (and a .png) here")
    b.add_argument("--no-plot", action="store_true")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("selftest", help="run the seeded oracle-equivalence suite")
    t.add_argument("--seed", type=int)
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
