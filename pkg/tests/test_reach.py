import pytest

from racreach.automaton import Interval, Jump, Location, ModelError, Rac, unroll
from racreach.elimination import EliminationMode
from racreach.modelio import parse_model
from racreach.polytope import HPolytope, bounding_box, is_empty, set_equal
from racreach.reach import (
    GoalSpec,
    StateLayout,
    SymbolicState,
    assemble_forward_region,
    build_reach_tree,
    goal_nodes,
    jump_successor,
    project_and_lift,
    time_successor,
)

U = Interval()


def rows(dim, spec):
    """Tiny helper: list of ({index: coeff}, bound) into an HPolytope."""
    A, b = [], []
    for entries, bound in spec:
        r = [0] * dim
        for i, a in entries.items():
            r[i] = a
        A.append(r)
        b.append(bound)
    return HPolytope.from_rows(A, b)


def eq(i, j=None, c=0):
    """x_i - x_j == c (or x_i == c) as two rows."""
    e = {i: 1} if j is None else {i: 1, j: -1}
    n = {k: -v for k, v in e.items()}
    return [(e, c), (n, -c)]


@pytest.fixture(scope="module")
def m1():
    return unroll(parse_model("single_delay").rac, 1)


def test_layout(m1):
    lay = StateLayout.of(m1)
    assert lay.variables == ("x", "T") and lay.copies == ("r_0", "r_1")
    assert lay.dim == 4 and lay.timer_index == 1 and lay.copy_index(1) == 3


@pytest.mark.parametrize("mode", list(EliminationMode))
def test_time_successor_single_delay(m1, mode):
    # dims: x, T, r_0, r_1
    start = rows(4, eq(0) + eq(1) + eq(2) + eq(3))
    got = time_successor(SymbolicState("A#0", start), m1, 1, mode)
    want = rows(4, eq(0, 1) + eq(2, 1) + eq(3) + [({1: 1}, 1), ({1: -1}, 0)])
    assert set_equal(got.polytope, want)


def test_time_successor_rectangular_rate():
    u = unroll(parse_model("window").rac, 1)
    start = rows(4, eq(0) + eq(1) + eq(2) + eq(3))
    got = time_successor(SymbolicState(u.roots[0], start), u, 5).polytope
    # T <= x <= 2T, T <= 5, the stopwatch follows T
    want = rows(4, [({0: -1, 1: 1}, 0), ({0: 1, 1: -2}, 0), ({1: 1}, 5), ({1: -1}, 0)] + eq(2, 1) + eq(3))
    assert set_equal(got, want)


def test_time_successor_of_empty_set(m1):
    got = time_successor(SymbolicState("A#0", HPolytope.empty(4)), m1, 1)
    assert is_empty(got.polytope)


def test_jump_successor_freezes_stopwatch(m1):
    tree = build_reach_tree(m1, 1)
    k = next(i for i, j in enumerate(m1.rac.jumps) if j.source == "A#0")
    post = jump_successor(tree.nodes[0].state, k, m1)
    assert set_equal(post.polytope, tree.nodes[0].state.polytope)
    with pytest.raises(ValueError):
        jump_successor(SymbolicState("B#1", tree.nodes[0].state.polytope), k, m1)


def test_jump_successor_applies_reset():
    car = unroll(parse_model("car_like").rac, 1)
    tree = build_reach_tree(car, 100)
    drive = [n for n in tree.nodes if car.origin[n.state.location] == "drive"]
    assert drive
    k = drive[0].jump
    post = jump_successor(tree.nodes[0].state, k, car)
    # y was reset to 0 on entering drive
    assert bounding_box(post.polytope).intervals[1] == (0, 0)


def test_tree_single_delay(m1):
    tree = build_reach_tree(m1, 1)
    assert len(tree.nodes) == 2 and tree.edges == [(0, 0, 1)]
    assert tree.children(0) == [1] and tree.original_location(1) == "B"
    assert tree.location_path(1) == ("A", "B")
    assert tree.nodes[1].expired == frozenset({0})
    # in B the frozen stopwatch is at most the global time
    box = bounding_box(tree.nodes[1].state.polytope).intervals
    assert box[2] == (0, 1) and box[3] == (0, 0)


def test_tree_rejects_bad_roots():
    race = parse_model("race").rac
    with pytest.raises(ModelError):
        build_reach_tree(unroll(race, 1), 1, init_location="B")
    with pytest.raises(ModelError):
        build_reach_tree(unroll(race, 1), -1)


def test_blocking_node_warns():
    a = Location("A", (Interval(0, 1), U), (Interval.point(1), Interval.point(0)), (Interval.point(0),) * 2)
    b = Location("B", (U, U), (Interval.point(0),) * 2)
    m = Rac(("x", "y"), (a, b), (Jump("A", "B", (Interval(0, 1), Interval.point(5)), (None, None)),))
    tree = build_reach_tree(unroll(m, 1), 3)
    assert len(tree.nodes) == 1 and tree.warnings and "neither reach" in tree.warnings[0]


def test_goal_nodes_with_valuation():
    doc = parse_model("window")
    tree = build_reach_tree(unroll(doc.rac, 1), 5)
    hits = goal_nodes(tree, doc.goal)
    assert [i for i, _ in hits] == [1]
    box = bounding_box(hits[0][1]).intervals
    assert box[0] == (3, 4)
    nowhere = GoalSpec(frozenset({"B"}), HPolytope.from_rows([[1]], [-1]))
    assert goal_nodes(tree, nowhere) == []
    with pytest.raises(ValueError):
        goal_nodes(tree, GoalSpec(frozenset({"B"}), HPolytope.universe(2)))


def test_project_and_lift_single_delay(m1):
    tree = build_reach_tree(m1, 1)
    layout = tree.layout
    got = project_and_lift(tree.nodes[1].state.polytope, layout, tree.nodes[1].expired, 100)
    assert set_equal(got, HPolytope.from_box([(0, 1), (0, 100)]))


def test_forward_region_race():
    doc = parse_model("race")
    tree = build_reach_tree(unroll(doc.rac, 1), 1)
    region = assemble_forward_region(tree, doc.goal, 10)
    assert region.copies == ("r1_0", "r1_1", "r2_0", "r2_1")
    assert len(region.members) == 1 and region.lifted == (False, True, True, True)
    # s(r1_0) <= 1, s(r1_0) <= s(r2_0) <= 10, unused copies anywhere in [0, 10]
    want = HPolytope.from_rows(
        [[1, 0, 0, 0], [-1, 0, 0, 0], [1, 0, -1, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, -1, 0, 0], [0, 0, 0, 1], [0, 0, 0, -1]],
        [1, 0, 0, 10, 10, 0, 10, 0],
    )
    assert set_equal(region.members[0], want)


@pytest.mark.parametrize("name", ["single_delay", "race", "window", "car_like"])
def test_fm_and_fm_plus_trees_agree(name):
    doc = parse_model(name)
    a = doc.analysis
    u = unroll(doc.rac, min(a.jmp, 2))
    t1 = build_reach_tree(u, a.t_max, mode=EliminationMode.FM)
    t2 = build_reach_tree(u, a.t_max, mode=EliminationMode.FM_PLUS)
    assert len(t1.nodes) == len(t2.nodes)
    for n1, n2 in zip(t1.nodes, t2.nodes):
        assert set_equal(n1.state.polytope, n2.state.polytope)


def test_car_like_reproduces_first_cycle_constraints():
    doc = parse_model("car_like")
    tree = build_reach_tree(unroll(doc.rac, 4), 100)
    region = assemble_forward_region(tree, doc.goal, 100)
    paths = {tree.location_path(i) for i in region.node_indices}
    assert ("charge", "drive", "empty") in paths
    assert ("charge", "drive", "charge", "drive", "empty") in paths
    i = next(i for i in region.node_indices if tree.location_path(i) == ("charge", "drive", "empty"))
    member = region.members[region.node_indices.index(i)]
    assert bounding_box(member).intervals[:2] == ((0, 2), (0, 100))
