import numpy as np
import pytest
from scipy.optimize import linprog

from polyinv.simplex import solve_inequality_lp

BOX_A = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
BOX_B = np.array([15, 15, 10, 10], dtype=float)


def test_max_x1_over_state_box():
    status, opt, arg = solve_inequality_lp([1, 0], BOX_A, BOX_B)
    assert status == "optimal"
    assert opt == pytest.approx(15.0, abs=1e-9)
    assert np.all(BOX_A @ arg <= BOX_B + 1e-9)


def test_contradictory_constraints_infeasible():
    status, _, _ = solve_inequality_lp([1, 0], [[1, 0], [-1, 0]], [1, -2])
    assert status == "infeasible"


def test_unconstrained_direction_unbounded():
    status, _, _ = solve_inequality_lp([1, 0], [[0, 1]], [1])
    assert status == "unbounded"


def test_minimize_sense():
    status, opt, _ = solve_inequality_lp([1, 0], BOX_A, BOX_B, maximize=False)
    assert status == "optimal"
    assert opt == pytest.approx(-15.0, abs=1e-9)


def test_equality_like_degenerate_rows():
    a = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    b = [3, -3, 7, -7]
    status, opt, arg = solve_inequality_lp([0, 1], a, b)
    assert status == "optimal"
    assert opt == pytest.approx(7.0, abs=1e-9)
    assert arg == pytest.approx([3.0, 7.0], abs=1e-9)


def test_no_constraints():
    status, opt, _ = solve_inequality_lp([0.0, 0.0], np.zeros((0, 2)), np.zeros(0))
    assert status == "optimal" and opt == 0.0
    status, _, _ = solve_inequality_lp([1.0, 0.0], np.zeros((0, 2)), np.zeros(0))
    assert status == "unbounded"


def test_against_scipy_on_random_instances():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 14))
        a = rng.uniform(-2, 2, size=(m, n))
        b = rng.uniform(-1, 3, size=m)
        c = rng.uniform(-2, 2, size=n)
        status, opt, arg = solve_inequality_lp(c, a, b)
        # presolve disabled: HiGHS presolve can report unbounded models as
        # infeasible, which this instance generator does hit
        ref = linprog(
            -c, A_ub=a, b_ub=b, bounds=[(None, None)] * n, method="highs",
            options={"presolve": False},
        )
        ref_status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(ref.status)
        assert status == ref_status
        if status == "optimal":
            assert opt == pytest.approx(-ref.fun, abs=1e-6, rel=1e-6)
            assert np.all(a @ arg <= b + 1e-9)
