"""Four NNLS solvers on one generated problem from each family.

Prints the objective 0.5||Ax - b||^2, iteration count and wall time of the
rescaled projected-gradient method against an active-set solver and two
accelerated projected-gradient variants. Nonnegative families (T1, T3, T5)
have optimum 0 by construction.

Run:  python3 demos/compare_solvers.py [n]
"""

import sys
import time

from antilop import SOLVERS, solve
from antilop.nqp import SolverConfig
from antilop.testgen import KINDS, TestCaseSpec, generate

n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
config = SolverConfig()  # 5n iterations, epsilon 1e-12 n

for kind in sorted(KINDS):
    inst = generate(TestCaseSpec(kind, n=n, d=int(1.5 * n), sparsity=0.2, seed=1))
    print(f"{kind}  ({'+' if KINDS[kind][0] else '+/-'}, {KINDS[kind][1]})")
    for name in SOLVERS:
        t0 = time.perf_counter()
        res = solve(name, inst.A, inst.b, config)
        dt = time.perf_counter() - t0
        print(f"  {name:<10} f={0.5 * res.residual_sq:10.3e}  iters={res.iterations:5d}  {dt:6.3f}s  {res.termination}")
