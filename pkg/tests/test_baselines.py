import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antilop.baselines import (
    SOLVERS,
    BaselineKind,
    solve,
    solve_accelerated,
    solve_anti_accelerated,
    solve_fast_activeset,
)
from antilop.nnls import solve_nnls
from antilop.nqp import NqpProblem, SolverConfig, Termination
from antilop.testgen import TestCaseSpec, generate

from conftest import EQ3_H, EQ3_H_LIN, EQ3_Q, EQ3_Q_LIN
from oracles import brute_force_nnls, solve_2x2

LONG = SolverConfig(max_iters=200_000)


def test_kind_names_match_registry():
    assert {k.value for k in BaselineKind} | {"antilop"} == set(SOLVERS)


def test_fast_examples():
    assert solve_fast_activeset(np.eye(2), [3.0, -1.0]).x.tolist() == [3.0, 0.0]
    A, b = np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([2.0, -1.0])
    np.testing.assert_allclose(solve_fast_activeset(A, b).x, brute_force_nnls(A, b)[0], atol=1e-12)


def test_fast_origin_when_correlations_nonpositive(rng):
    A = np.abs(rng.standard_normal((8, 5)))
    b = -np.abs(rng.standard_normal(8))
    assert np.all(A.T @ b <= 0)
    r = solve_fast_activeset(A, b)
    assert r.x.tolist() == [0.0] * 5
    assert r.termination is Termination.KKT_SATISFIED


def test_fast_one_record_per_outer_iteration(rng):
    A, b = rng.standard_normal((30, 20)), rng.standard_normal(30)
    r = solve_fast_activeset(A, b)
    assert [t.k for t in r.inner.trace] == list(range(r.iterations + 1))


def test_fast_iteration_cap(rng):
    A, b = rng.standard_normal((30, 20)), rng.standard_normal(30)
    r = solve_fast_activeset(A, b, SolverConfig(max_iters=1))
    assert r.termination is Termination.MAX_ITERS


def test_fast_singular_passive_block():
    # two identical columns make every two-column passive block singular
    A = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
    b = np.array([1.0, 2.0, 1.0])
    r = solve_fast_activeset(A, b)
    assert 0.5 * r.residual_sq == pytest.approx(brute_force_nnls(A, b)[1], abs=1e-10)


def test_accelerated_examples():
    r = solve_accelerated(NqpProblem(np.eye(2), [3.0, 4.0]))
    assert r.x.tolist() == [0.0, 0.0]
    assert r.termination is Termination.EMPTY_PASSIVE_SET

    r = solve_accelerated(NqpProblem(np.eye(2), [-1.0, -2.0]), SolverConfig(epsilon=1e-18, max_iters=200))
    np.testing.assert_allclose(r.x, [1.0, 2.0], atol=1e-8)
    assert r.iterations <= 200

    r = solve_accelerated(NqpProblem(EQ3_Q, EQ3_Q_LIN), SolverConfig(epsilon=1e-16, max_iters=10_000))
    np.testing.assert_allclose(r.x, solve_2x2(EQ3_Q, -EQ3_Q_LIN), atol=1e-6)


def test_accelerated_step_in_trace():
    r = solve_accelerated(NqpProblem(np.eye(2), [-1.0, -2.0]), SolverConfig(max_iters=3, epsilon=1e-300))
    assert r.trace[0].alpha == pytest.approx(1 / np.sqrt(2))


def test_accelerated_zero_matrix():
    r = solve_accelerated(NqpProblem(np.zeros((2, 2)), [-1.0, 0.0]))
    assert r.termination is Termination.ZERO_CURVATURE


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1), st.booleans())
def test_accelerated_iterates_feasible_and_gradient_exact(n, seed, restart):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n + 5, n))
    p = NqpProblem(A.T @ A, rng.standard_normal(n))
    tol = 1e-8 * (1 + np.abs(p.q).max()) * (1 + np.abs(p.Q).max())

    def check(k, x, g):
        assert np.all(x >= 0)
        assert np.abs(g - (p.Q @ x + p.q)).max() <= tol

    solve_accelerated(p, SolverConfig(max_iters=300, restart=restart), callback=check)


def test_anti_accelerated_examples():
    # the default 5n = 10 iterations is too few for a 1/sqrt(2) step; give it room
    r = solve_anti_accelerated(np.eye(2), [3.0, -1.0], LONG)
    assert r.termination.converged
    np.testing.assert_allclose(r.x, [3.0, 0.0], atol=1e-6)

    L = np.linalg.cholesky(EQ3_H)
    A = L.T  # A'A = H
    b = np.linalg.solve(L, -EQ3_H_LIN)  # A'b = -h
    np.testing.assert_allclose(A.T @ A, EQ3_H, rtol=1e-14)
    np.testing.assert_allclose(A.T @ b, -EQ3_H_LIN, rtol=1e-14)
    cfg = SolverConfig(epsilon=1e-20, max_iters=10_000)
    np.testing.assert_allclose(solve_anti_accelerated(A, b, cfg).x, solve_nnls(A, b, cfg).x, atol=1e-6)

    r = solve_anti_accelerated(np.zeros((3, 2)), [1.0, 1.0, 1.0])
    assert r.x.tolist() == [0.0, 0.0] and r.dropped == (0, 1)


@pytest.mark.parametrize("seed", range(6))
def test_all_solvers_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 101))
    A = rng.standard_normal((int(1.5 * n) + 10, n))
    b = rng.standard_normal(A.shape[0])
    cfg = SolverConfig(epsilon=1e-16 * n, max_iters=500_000)
    fs = {name: 0.5 * solve(name, A, b, cfg).residual_sq for name in SOLVERS}
    ref = fs["fast"]
    for name, f in fs.items():
        assert abs(f - ref) <= 1e-6 * abs(ref), (name, fs)


def test_unknown_solver():
    with pytest.raises(ValueError):
        solve("simplex", np.eye(2), [1.0, 1.0])


def test_anti_versus_plain_acceleration_report():
    # reported, not asserted: how often rescaling helps the accelerated method
    wins = 0
    total = 10
    for seed in range(total):
        inst = generate(TestCaseSpec("T1", n=40, d=60, sparsity=0.1 * (seed % 5), seed=seed))
        cfg = SolverConfig(max_iters=2000)
        a = solve("accer", inst.A, inst.b, cfg)
        b = solve("anti-accer", inst.A, inst.b, cfg)
        wins += b.iterations <= a.iterations
    print(f"anti-accer needed no more iterations than accer on {wins}/{total} T1 instances")
