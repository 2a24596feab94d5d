"""Run a small benchmark suite and export convergence traces.

Writes, under ./demo-out/:

* report.json / report.csv   one row per (kind, sub-test, solver)
* trace-<solver>.csv         per-iteration f and masked gradient norm on one T3 case

The same can be done from the shell with ``antilop-bench suite`` and
``antilop-bench solve``; this script shows the library calls behind them.

Run:  python3 demos/suite_and_traces.py
"""

import os

from antilop import SOLVERS, solve
from antilop.bench import replay_cell, run_suite, write_report
from antilop.nqp import SolverConfig, write_trace_csv
from antilop.testgen import TestCaseSpec, generate

out = "demo-out"
os.makedirs(out, exist_ok=True)

report = run_suite(n=100, d=150, sub_tests=3, seed=0, config=SolverConfig(time_cap=10.0))
write_report(report, os.path.join(out, "report.json"))
for row in report.aggregate():
    print(f"{row['kind']} {row['solver']:<10} mean |f-f*| = {row['mean_abs_gap']:.2e}")

# any row replays exactly from the seed it records
cell = report.cells[0]
assert replay_cell(cell) == cell.f

inst = generate(TestCaseSpec("T3", n=100, d=150, seed=5))
for name in SOLVERS:
    res = solve(name, inst.A, inst.b, SolverConfig())
    write_trace_csv(os.path.join(out, f"trace-{name}.csv"), res.inner.trace)
print(f"wrote {out}/")
