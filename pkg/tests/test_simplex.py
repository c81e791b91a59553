import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from carat.simplex import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    SimplexResult,
    solve_standard_form,
)


def with_slacks(c, A_ub, b_ub):
    """Turn min c'x s.t. A_ub x <= b_ub, x >= 0 into equality standard form."""
    m, n = A_ub.shape
    A = np.hstack([A_ub, np.eye(m)])
    c_full = np.concatenate([c, np.zeros(m)])
    return c_full, A, b_ub


def test_known_two_variable_lp():
    c = np.array([-1.0, -2.0])
    A_ub = np.array([[1.0, 1.0], [1.0, 3.0]])
    b_ub = np.array([4.0, 6.0])
    res = solve_standard_form(*with_slacks(c, A_ub, b_ub))
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(-5.0)
    assert res.x[:2] == pytest.approx([3.0, 1.0])


def test_equality_only_problem():
    # x1 + x2 = 1, minimize x1 -> (0, 1)
    res = solve_standard_form(np.array([1.0, 0.0]), np.array([[1.0, 1.0]]), np.array([1.0]))
    assert res.status == OPTIMAL
    assert res.x == pytest.approx([0.0, 1.0])


def test_negative_rhs_rows_are_normalized():
    # -x1 - x2 = -1 is the same constraint written with a negative rhs
    res = solve_standard_form(np.array([1.0, 0.0]), np.array([[-1.0, -1.0]]), np.array([-1.0]))
    assert res.status == OPTIMAL
    assert res.x == pytest.approx([0.0, 1.0])


def test_infeasible_detected():
    # x1 + x2 = -1 with x >= 0 cannot hold
    res = solve_standard_form(np.array([1.0, 1.0]), np.array([[1.0, 1.0]]), np.array([-1.0]))
    assert res.status == INFEASIBLE


def test_unbounded_detected():
    # x2 = 1 fixes x2; x1 unconstrained below in the objective
    res = solve_standard_form(np.array([-1.0, 0.0]), np.array([[0.0, 1.0]]), np.array([1.0]))
    assert res.status == UNBOUNDED


def test_redundant_rows_are_tolerated():
    A = np.array([[1.0, 1.0], [2.0, 2.0]])
    b = np.array([1.0, 2.0])
    res = solve_standard_form(np.array([1.0, 2.0]), A, b)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(1.0)


def test_degenerate_vertex_terminates():
    # Multiple constraints meet at the optimum; Bland's rule must not cycle.
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    A_ub = np.array(
        [
            [0.25, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    b_ub = np.array([0.0, 0.0, 1.0])
    res = solve_standard_form(*with_slacks(c, A_ub, b_ub))
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(-0.05)


def test_iteration_limit_reported():
    c = np.array([-1.0, -2.0])
    A_ub = np.array([[1.0, 1.0], [1.0, 3.0]])
    b_ub = np.array([4.0, 6.0])
    res = solve_standard_form(*with_slacks(c, A_ub, b_ub), max_iterations=1)
    assert res.status == ITERATION_LIMIT


def test_determinism_bitwise():
    rng = np.random.default_rng(7)
    A = rng.uniform(-1, 1, size=(8, 14))
    x0 = rng.uniform(0, 1, size=14)
    b = A @ x0
    c = rng.uniform(-1, 1, size=14)
    first = solve_standard_form(c, A, b)
    second = solve_standard_form(c, A, b)
    assert first.status == second.status
    assert np.array_equal(first.x, second.x)
    assert first.objective == second.objective


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_matches_scipy_on_random_feasible_problems(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 6))
    n = int(rng.integers(m, m + 8))
    A = rng.uniform(-2, 2, size=(m, n))
    x0 = rng.uniform(0, 2, size=n)
    b = A @ x0  # feasible by construction
    c = rng.uniform(-1, 1, size=n)

    ours = solve_standard_form(c, A, b)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")

    if ref.status == 3:
        assert ours.status == UNBOUNDED
    else:
        assert ref.status == 0
        assert ours.status == OPTIMAL
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
        assert np.all(ours.x >= -1e-9)
        assert A @ ours.x == pytest.approx(b, abs=1e-6)
