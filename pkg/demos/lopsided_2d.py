"""Why rescaling helps: a two-variable quadratic with lopsided curvature.

H has diagonal 1 and 9, so the level sets are long thin ellipses and plain
steepest descent zig-zags across the valley. Dividing each variable by its
column length turns H into a matrix of cosines with unit diagonal; the level
sets become nearly round and a handful of exact line-search steps suffice.

Run:  python3 demos/lopsided_2d.py
"""

import numpy as np

from antilop.nnls import rescale
from antilop.nqp import NqpProblem, SolverConfig, solve_nqp, steepest_descent

H = np.array([[1.0, 0.1], [0.1, 9.0]])
h = np.array([-4.0, -5.0])
x0 = np.array([30.0, 2.0])

plain = steepest_descent(NqpProblem(H, h), x0, epsilon=1e-10)
print(f"plain steepest descent: {plain.iterations} steps, x = {plain.x}")

s = rescale(H, h)
print("cosine matrix:\n", s.Q)
# the same starting point, expressed in the rescaled variables
y0 = x0 * s.scale
anti = solve_nqp(s.problem, SolverConfig(epsilon=1e-10), x0=y0)
print(f"rescaled projected descent: {anti.iterations} steps, x = {anti.x / s.scale}")

for r in anti.trace:
    print(f"  k={r.k}  f={r.f:.6f}  |grad|^2={r.grad_bar_sq:.3e}")
