from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from racreach import lp

scipy_opt = pytest.importorskip("scipy.optimize")


def test_simple_optimum_and_witness():
    A = [[1, 0], [0, 1], [-1, 0], [0, -1], [1, 1]]
    b = [2, 2, 0, 0, 3]
    r = lp.maximize(A, b, [1, 1])
    assert r.status is lp.LPStatus.OPTIMAL and r.value == 3
    assert sum(r.x) == 3 and all(sum(a * x for a, x in zip(row, r.x)) <= bb for row, bb in zip(A, b))


@pytest.mark.parametrize(
    "A,b,c,status",
    [
        ([[1, 0]], [1], [0, 1], lp.LPStatus.UNBOUNDED),
        ([[1], [-1]], [1, -2], [1], lp.LPStatus.INFEASIBLE),
        ([], [], [0, 0], lp.LPStatus.OPTIMAL),
        ([], [], [1, 0], lp.LPStatus.UNBOUNDED),
    ],
)
def test_status_cases(A, b, c, status):
    assert lp.maximize(A, b, c).status is status


def test_exact_rational_answer():
    A = [[3, 1], [1, 3], [-1, 0], [0, -1]]
    b = [1, 1, 0, 0]
    r = lp.maximize(A, b, [1, 1])
    assert r.value == F(1, 2) and r.x == (F(1, 4), F(1, 4))


def test_feasibility_and_square_solve():
    assert lp.is_feasible([[1], [-1]], [0, 0])
    assert not lp.is_feasible([[1], [-1]], [0, -1])
    assert lp.solve_square([[2, 1], [1, 3]], [3, 5]) == [F(4, 5), F(7, 5)]


def test_degenerate_problem_terminates():
    # many constraints through one vertex: Bland's rule must not cycle
    A = [[1, k] for k in range(-5, 6)] + [[-1, 0], [0, -1]]
    b = [0] * 11 + [0, 0]
    r = lp.maximize(A, b, [1, 1])
    assert r.status is lp.LPStatus.OPTIMAL and r.value == 0


@given(
    st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=1, max_size=6),
    st.lists(st.integers(-2, 6), min_size=6, max_size=6),
    st.lists(st.integers(-3, 3), min_size=3, max_size=3),
)
def test_matches_floating_solver(rows, rhs, c):
    box = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]
    A = rows + box
    b = rhs[: len(rows)] + [5] * 6
    mine = lp.maximize(A, b, c)
    ref = scipy_opt.linprog(-np.array(c, float), A_ub=np.array(A, float), b_ub=np.array(b, float),
                            bounds=[(None, None)] * 3, method="highs")
    if ref.status == 2:
        assert mine.status is lp.LPStatus.INFEASIBLE
    else:
        assert mine.status is lp.LPStatus.OPTIMAL
        assert abs(float(mine.value) + ref.fun) < 1e-7
