"""Benchmark harness and command-line interface.

Subcommands::

    gen    write one generated instance (A.mtx, b.mtx, xstar.mtx, meta.json)
    solve  run one solver on an instance directory, write a trace CSV and a result JSON
    suite  run solvers over T1..T6 x sub-tests and write a JSON report plus a flat CSV

The objective reported everywhere is ``0.5 ||Ax - b||^2``, computed from
``A`` and ``b``. Wall time covers the solve call only, never file I/O.
"""

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .baselines import SOLVERS, solve
from .nqp import NumericalFailure, SolverConfig, write_trace_csv
from .testgen import KINDS, MAX_SPARSITY, TestCaseSpec, generate, load_instance, reference_fstar, save_instance

__all__ = [
    "SCHEMA",
    "ALGOS",
    "Cell",
    "BenchReport",
    "default_time_cap",
    "subtest_sparsity",
    "subtest_seed",
    "run_cell",
    "run_suite",
    "replay_cell",
    "write_report",
    "main",
]

log = logging.getLogger(__name__)

SCHEMA = "bench-report/1"
ALGOS = tuple(SOLVERS)
TIME_CAP_ENV = "ANTILOP_TIME_CAP"
DESK_TIME_CAP = 60.0

CELL_FIELDS = (
    "kind",
    "sub_test",
    "seed",
    "sparsity",
    "n",
    "d",
    "solver",
    "f",
    "f_star",
    "abs_gap",
    "gap_plus_one",
    "wall_time",
    "iterations",
    "termination",
    "epsilon",
    "max_iters",
    "time_cap",
    "stall_window",
    "error",
)


def default_time_cap():
    value = os.environ.get(TIME_CAP_ENV)
    return float(value) if value else DESK_TIME_CAP


def subtest_sparsity(sub_test, sub_tests):
    """Sub-tests spread sparsity evenly over ``[0, 0.4]``."""
    if sub_tests <= 1:
        return 0.0
    return round(MAX_SPARSITY * sub_test / (sub_tests - 1), 12)


def subtest_seed(base_seed, kind, sub_test):
    kind_index = sorted(KINDS).index(kind)
    state = np.random.SeedSequence([base_seed, kind_index, sub_test]).generate_state(1, np.uint64)
    return int(state[0])


@dataclass
class Cell:
    kind: str
    sub_test: int
    seed: int
    sparsity: float
    n: int
    d: int
    solver: str
    f: Optional[float] = None
    f_star: Optional[float] = None
    abs_gap: Optional[float] = None
    gap_plus_one: Optional[float] = None
    wall_time: Optional[float] = None
    iterations: Optional[int] = None
    termination: Optional[str] = None
    epsilon: Optional[float] = None
    max_iters: Optional[int] = None
    time_cap: Optional[float] = None
    stall_window: Optional[int] = None
    error: Optional[str] = None

    def spec(self):
        return TestCaseSpec(kind=self.kind, n=self.n, d=self.d, sparsity=self.sparsity, seed=self.seed)

    def config(self):
        return SolverConfig(
            epsilon=self.epsilon,
            max_iters=self.max_iters,
            time_cap=self.time_cap,
            stall_window=self.stall_window,
        )


@dataclass
class BenchReport:
    cells: List[Cell]
    config: dict
    timing_reliable: bool = True
    # (kind, sub_test, solver) -> NnlsResult, only when requested
    results: Dict[tuple, object] = field(default_factory=dict, repr=False)

    def aggregate(self):
        """Mean gap, time and iteration count per (kind, solver)."""
        groups = {}
        for c in self.cells:
            groups.setdefault((c.kind, c.solver), []).append(c)
        out = []
        for (kind, solver), cells in sorted(groups.items()):
            ok = [c for c in cells if c.error is None]
            terms = {}
            for c in ok:
                terms[c.termination] = terms.get(c.termination, 0) + 1
            out.append(
                {
                    "kind": kind,
                    "solver": solver,
                    "sub_tests": len(cells),
                    "failures": len(cells) - len(ok),
                    "mean_abs_gap": _mean([c.abs_gap for c in ok]),
                    "mean_wall_time": _mean([c.wall_time for c in ok]),
                    "mean_iterations": _mean([c.iterations for c in ok]),
                    "terminations": terms,
                }
            )
        return out

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "config": self.config,
            "timing_reliable": self.timing_reliable,
            "aggregates": self.aggregate(),
            "cells": [asdict(c) for c in self.cells],
        }


def _mean(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def run_cell(instance, solver, config):
    """Solve one instance; returns ``(result, wall_seconds)``."""
    t0 = time.perf_counter()
    result = solve(solver, instance.A, instance.b, config)
    return result, time.perf_counter() - t0


def _resolved(cell, config, n):
    cell.epsilon = config.epsilon_for(n)
    cell.max_iters = config.max_iters_for(n)
    cell.time_cap = config.time_cap
    cell.stall_window = config.stall_window


def _run_instance(spec, sub_test, solvers, config, keep):
    instance = generate(spec)
    cells, results = [], {}
    for solver in solvers:
        cell = Cell(spec.kind, sub_test, spec.seed, spec.sparsity, spec.n, spec.d, solver)
        _resolved(cell, config, spec.n)
        try:
            result, wall = run_cell(instance, solver, config)
        except (NumericalFailure, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            cell.error = f"{type(exc).__name__}: {exc}"
            log.warning("%s sub-test %d %s failed: %s", spec.kind, sub_test, solver, cell.error)
        else:
            cell.f = 0.5 * result.residual_sq
            cell.wall_time = wall
            cell.iterations = result.iterations
            cell.termination = result.termination.value
            if keep:
                results[(spec.kind, sub_test, solver)] = result
        cells.append(cell)

    f_values = [c.f for c in cells if c.f is not None]
    f_star = reference_fstar(instance, f_values) if (f_values or instance.f_star_known is not None) else None
    for c in cells:
        c.f_star = f_star
        if c.f is not None and f_star is not None:
            c.abs_gap = abs(c.f - f_star)
            c.gap_plus_one = c.f - f_star + 1.0
    return cells, results


def run_suite(
    kinds: Sequence[str] = tuple(sorted(KINDS)),
    n: int = 400,
    d: int = 600,
    sub_tests: int = 5,
    seed: int = 0,
    solvers: Sequence[str] = ALGOS,
    config: Optional[SolverConfig] = None,
    parallel: bool = False,
    keep_results: bool = False,
) -> BenchReport:
    """Run every solver on every (kind, sub-test) instance.

    Sub-test ``i`` uses sparsity ``0.4 * i / (sub_tests - 1)`` and a seed
    derived from ``(seed, kind, i)``; both are stored on each cell so any row
    can be replayed with :func:`replay_cell`. For mixed-sign kinds the
    reference optimum is the best objective reached by any solver on that
    instance.
    """
    if not kinds or not solvers:
        raise ValueError("need at least one kind and one solver")
    for s in solvers:
        if s not in SOLVERS:
            raise ValueError(f"unknown solver {s!r}")
    if config is None:
        config = SolverConfig(time_cap=default_time_cap())
    jobs = []
    for kind in kinds:
        for i in range(sub_tests):
            spec = TestCaseSpec(kind, n, d, subtest_sparsity(i, sub_tests), subtest_seed(seed, kind, i))
            jobs.append((spec, i, tuple(solvers), config, keep_results))

    cells, results = [], {}
    if parallel:
        with ProcessPoolExecutor() as pool:
            outputs = list(pool.map(_run_instance, *zip(*jobs)))
    else:
        outputs = []
        for job in jobs:
            log.info("running %s sub-test %d (seed %d)", job[0].kind, job[1], job[0].seed)
            outputs.append(_run_instance(*job))
    for c, r in outputs:
        cells.extend(c)
        results.update(r)

    report_config = {
        "kinds": list(kinds),
        "n": n,
        "d": d,
        "sub_tests": sub_tests,
        "seed": seed,
        "solvers": list(solvers),
        "epsilon": config.epsilon,
        "max_iters": config.max_iters,
        "time_cap": config.time_cap,
        "stall_window": config.stall_window,
        "parallel": parallel,
    }
    return BenchReport(cells=cells, config=report_config, timing_reliable=not parallel, results=results)


def replay_cell(cell):
    """Regenerate the instance of `cell` and re-run its solver; returns the objective."""
    if isinstance(cell, dict):
        cell = Cell(**{k: cell[k] for k in CELL_FIELDS})
    instance = generate(cell.spec())
    result, _ = run_cell(instance, cell.solver, cell.config())
    return 0.5 * result.residual_sq


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(report, path):
    """Write the JSON report at `path` and the flat cell table next to it as ``.csv``."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    csv_path = os.path.splitext(path)[0] + ".csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CELL_FIELDS)
        for c in report.cells:
            w.writerow([_fmt(getattr(c, name)) for name in CELL_FIELDS])
    return csv_path


# --- command line -----------------------------------------------------------


def _sparsity(text):
    value = float(text)
    if not 0.0 <= value <= MAX_SPARSITY:
        raise argparse.ArgumentTypeError(f"sparsity must lie in [0, {MAX_SPARSITY}]")
    return value


def _kinds(text):
    kinds = [k.strip().upper() for k in text.split(",") if k.strip()]
    if len(kinds) == 1 and ".." in kinds[0]:
        lo, hi = kinds[0].split("..")
        kinds = [f"T{i}" for i in range(int(lo[1:]), int(hi[1:]) + 1)]
    bad = [k for k in kinds if k not in KINDS]
    if bad or not kinds:
        raise argparse.ArgumentTypeError(f"unknown kinds {bad}; use T1..T6")
    return kinds


def _solvers(text):
    names = [s.strip() for s in text.split(",") if s.strip()]
    if names == ["all"]:
        return list(ALGOS)
    bad = [s for s in names if s not in SOLVERS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown solvers {bad}; choose from {', '.join(ALGOS)}")
    return names


def _add_stopping_flags(p):
    p.add_argument("--epsilon", type=float, default=None, help="threshold on ||masked gradient||^2 (default 1e-12*n)")
    p.add_argument("--max-iters", type=int, default=None, help="iteration cap (default 5n)")
    p.add_argument("--time-cap", type=float, default=None, help=f"seconds per solve (default ${TIME_CAP_ENV} or 60)")
    p.add_argument("--stall-window", type=int, default=None, help="stop after this many iterations without a new gradient minimum")


def _config(args):
    return SolverConfig(
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        time_cap=args.time_cap if args.time_cap is not None else default_time_cap(),
        stall_window=args.stall_window,
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="antilop-bench", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate one test instance")
    g.add_argument("--kind", required=True, choices=sorted(KINDS))
    g.add_argument("--n", type=int, default=400)
    g.add_argument("--d", type=int, default=600)
    g.add_argument("--sparsity", type=_sparsity, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True, help="output directory")

    s = sub.add_parser("solve", help="solve one instance directory")
    s.add_argument("--algo", required=True, choices=ALGOS)
    s.add_argument("-i", "--instance", required=True, help="instance directory written by gen")
    s.add_argument("--trace", default=None, help="trace CSV path (default <instance>/trace-<algo>.csv)")
    s.add_argument("--result", default=None, help="result JSON path (default <instance>/result-<algo>.json)")
    _add_stopping_flags(s)

    u = sub.add_parser("suite", help="run the T1..T6 benchmark suite")
    u.add_argument("--kinds", type=_kinds, default=sorted(KINDS), help="comma list or range, e.g. T1,T3 or T1..T6")
    u.add_argument("--n", type=int, default=400)
    u.add_argument("--d", type=int, default=600)
    u.add_argument("--sub-tests", type=int, default=5)
    u.add_argument("--seed", type=int, default=0, help="base seed; per-cell seeds are derived and recorded")
    u.add_argument("--solvers", type=_solvers, default=list(ALGOS), help="comma list or 'all'")
    u.add_argument("--report", required=True, help="JSON report path; a CSV is written alongside")
    u.add_argument("--parallel", action="store_true", help="run cells in parallel (timings become unreliable)")
    _add_stopping_flags(u)
    return parser


def cmd_generate(args):
    spec = TestCaseSpec(kind=args.kind, n=args.n, d=args.d, sparsity=args.sparsity, seed=args.seed)
    save_instance(generate(spec), args.out)
    print(args.out)
    return 0


def cmd_solve(args):
    instance = load_instance(args.instance)
    config = _config(args)
    trace_path = args.trace or os.path.join(args.instance, f"trace-{args.algo}.csv")
    result_path = args.result or os.path.join(args.instance, f"result-{args.algo}.json")
    n = instance.spec.n
    summary = {
        "algo": args.algo,
        "instance": os.path.abspath(args.instance),
        "epsilon": config.epsilon_for(n),
        "max_iters": config.max_iters_for(n),
        "time_cap": config.time_cap,
    }
    t0 = time.perf_counter()
    try:
        result = solve(args.algo, instance.A, instance.b, config)
    except NumericalFailure as exc:
        write_trace_csv(trace_path, exc.trace)
        summary.update(error=str(exc), termination="NumericalFailure")
        _dump_json(result_path, summary)
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - t0
    write_trace_csv(trace_path, result.inner.trace)
    summary.update(result.summary())
    summary.update(f=0.5 * result.residual_sq, wall_time=wall)
    if instance.f_star_known is not None:
        summary["abs_gap"] = abs(summary["f"] - instance.f_star_known)
    _dump_json(result_path, summary)
    print(json.dumps(result.summary()))
    return 0


def cmd_suite(args):
    report = run_suite(
        kinds=args.kinds,
        n=args.n,
        d=args.d,
        sub_tests=args.sub_tests,
        seed=args.seed,
        solvers=args.solvers,
        config=_config(args),
        parallel=args.parallel,
    )
    csv_path = write_report(report, args.report)
    for row in report.aggregate():
        gap = row["mean_abs_gap"]
        print(
            f"{row['kind']}  {row['solver']:<10}  |f-f*| {gap if gap is None else format(gap, '.2e'):>9}  "
            f"time {row['mean_wall_time']:.3f}s  iters {row['mean_iterations']:.0f}"
        )
    print(f"wrote {args.report} and {csv_path}")
    return 0


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    commands = {"gen": cmd_generate, "solve": cmd_solve, "suite": cmd_suite}
    try:
        return commands[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
