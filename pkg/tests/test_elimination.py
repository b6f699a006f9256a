import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import brute_force_projection, cyclic_chain, random_bounded_polytope
from racreach.elimination import (
    EliminationMode,
    NoEquationError,
    eliminate_all,
    eliminate_fm,
    eliminate_gauss,
    find_equation,
    project_onto,
)
from racreach.polytope import HPolytope, bounding_box, is_empty, is_subset, set_equal

MODES = list(EliminationMode)


def test_mode_parse():
    assert EliminationMode.parse("FM+") is EliminationMode.FM_PLUS
    assert EliminationMode.parse("fm") is EliminationMode.FM
    with pytest.raises(ValueError, match="unknown elimination mode"):
        EliminationMode.parse("simplex")


def test_fm_on_triangle():
    # 0 <= y <= x <= 1 projected on y gives [0, 1]
    p = HPolytope.from_rows([[0, -1], [-1, 1], [1, 0]], [0, 0, 1])
    q = eliminate_fm(p, 0)
    assert bounding_box(q).intervals == ((0, 1),)


def test_gauss_substitution():
    # x = y + 1, 0 <= x <= 3  ->  -1 <= y <= 2
    p = HPolytope.from_rows([[1, -1], [-1, 1], [1, 0], [-1, 0]], [1, -1, 3, 0])
    assert find_equation(p, 0) is not None
    q = eliminate_gauss(p, 0)
    assert bounding_box(q).intervals == ((-1, 2),)


def test_gauss_needs_an_equation():
    with pytest.raises(NoEquationError):
        eliminate_gauss(HPolytope.from_box([(0, 1), (0, 1)]), 0)


def test_strict_bounds_propagate():
    # 0 < x < y <= 1: projection on y is 0 < y <= 1
    p = HPolytope.from_rows([[-1, 0], [1, -1], [0, 1]], [0, 0, 1], strict=[True, True, False])
    q, _ = eliminate_all(p, [0])
    assert set_equal(q, HPolytope.from_rows([[-1], [1]], [0, 1], strict=[True, False]))


@pytest.mark.parametrize("mode", MODES)
def test_stats_and_on_step(mode):
    p = HPolytope.from_box([(0, 1)] * 4)
    steps = []
    q, stats = eliminate_all(p, [3, 1], mode, on_step=lambda v, cur: steps.append((v, cur.dim)))
    assert steps == [(1, 3), (3, 2)]
    assert stats.eliminations_performed == 2 and stats.max_intermediate_constraints == 6
    assert q.dim == 2


def test_bad_arguments():
    p = HPolytope.from_box([(0, 1)] * 2)
    with pytest.raises(IndexError):
        eliminate_all(p, [2])
    with pytest.raises(ValueError):
        eliminate_all(p, [0], order=[1])


def test_empty_input_stays_empty():
    q, _ = eliminate_all(HPolytope.empty(3), [0, 1])
    assert q.dim == 1 and is_empty(q)


def test_fm_plus_keeps_chain_small():
    p = cyclic_chain(4, (1, 2))
    a, sa = eliminate_all(p, range(4), EliminationMode.FM)
    b, sb = eliminate_all(p, range(4), EliminationMode.FM_PLUS)
    assert set_equal(a, b)
    assert 2 * sb.max_intermediate_constraints <= sa.max_intermediate_constraints


@given(st.integers(0, 10**6))
def test_projection_matches_vertex_hull(seed):
    rng = random.Random(seed)
    p = random_bounded_polytope(rng, dim=rng.randint(2, 4), max_rows=9)
    if is_empty(p):
        return
    keep = sorted(rng.sample(range(p.dim), rng.randint(1, p.dim - 1)))
    ref = brute_force_projection(p, keep)
    for mode in MODES:
        q, _ = project_onto(p, keep, mode)
        assert is_subset(q, ref) and is_subset(ref, q)


@given(st.integers(0, 10**6))
def test_elimination_order_does_not_matter(seed):
    rng = random.Random(seed)
    p = random_bounded_polytope(rng, dim=4, max_rows=10)
    order = [0, 1, 2]
    rng.shuffle(order)
    a, _ = eliminate_all(p, [0, 1, 2])
    b, _ = eliminate_all(p, [0, 1, 2], order=order)
    assert set_equal(a, b)


def test_rational_coefficients_are_exact():
    p = HPolytope.from_rows([[F(1, 3), F(1, 7)], [-1, 0], [0, -1]], [1, 0, 0])
    q, _ = eliminate_all(p, [0])
    assert bounding_box(q).intervals == ((0, 7),)
