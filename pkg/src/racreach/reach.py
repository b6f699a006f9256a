"""Forward reachability on unrolled models and projection to sample space.

State polytopes live in ``d = d_c + 1 + d_R^u`` dimensions laid out as the
original variables, the global timer, then one stopwatch per clock copy.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .automaton import Interval, ModelError, UnrolledRac
from .elimination import EliminationMode, EliminationStats, eliminate_all
from .polytope import (
    HPolytope,
    LinearConstraint,
    as_scalar,
    intersect,
    is_empty,
    lp_optimize,
    remove_redundant,
)

log = logging.getLogger(__name__)

__all__ = [
    "StateLayout",
    "SymbolicState",
    "ReachNode",
    "ReachTree",
    "GoalSpec",
    "ForwardRegion",
    "time_successor",
    "jump_successor",
    "build_reach_tree",
    "goal_nodes",
    "project_and_lift",
    "assemble_forward_region",
]

_ZERO = Fraction(0)


@dataclass(frozen=True)
class StateLayout:
    variables: tuple[str, ...]  # original variables followed by the timer
    copies: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.variables) + len(self.copies)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def timer_index(self) -> int:
        return len(self.variables) - 1

    def copy_index(self, k: int) -> int:
        return len(self.variables) + k

    @classmethod
    def of(cls, u: UnrolledRac) -> "StateLayout":
        return cls(tuple(u.rac.variables), tuple(c.name for c in u.copies))


@dataclass(frozen=True)
class SymbolicState:
    location: str
    polytope: HPolytope


def _row(dim: int, entries: dict[int, Fraction], bound, strict: bool = False) -> LinearConstraint:
    coeffs = [_ZERO] * dim
    for i, a in entries.items():
        coeffs[i] += as_scalar(a)
    return LinearConstraint(tuple(coeffs), as_scalar(bound), strict)


def _rect_rows(dim: int, offset: int, rect: Sequence[Interval]) -> list[LinearConstraint]:
    rows = []
    for i, iv in enumerate(rect):
        if iv.lo is not None:
            rows.append(_row(dim, {offset + i: -1}, -iv.lo))
        if iv.hi is not None:
            rows.append(_row(dim, {offset + i: 1}, iv.hi))
    return rows


def _check(s: SymbolicState, layout: StateLayout) -> None:
    if s.polytope.dim != layout.dim:
        raise ValueError(f"state has dimension {s.polytope.dim}, layout expects {layout.dim}")


def time_successor(
    s: SymbolicState,
    u: UnrolledRac,
    t_max,
    mode: EliminationMode = EliminationMode.FM_PLUS,
    stats: EliminationStats | None = None,
) -> SymbolicState:
    """All states reachable from ``s`` by letting time pass in its location."""
    layout = StateLayout.of(u)
    _check(s, layout)
    d = layout.dim
    if is_empty(s.polytope):
        return SymbolicState(s.location, HPolytope.empty(d))
    loc = u.rac.location(s.location)
    n = 2 * d + 1  # unprimed, primed, elapsed time
    t = 2 * d
    rows = list(s.polytope.embed(n, range(d)).constraints)
    for i, fl in enumerate(loc.flow):
        # a*t <= x' - x <= b*t
        if fl.lo is not None:
            rows.append(_row(n, {d + i: -1, i: 1, t: fl.lo}, 0))
        if fl.hi is not None:
            rows.append(_row(n, {d + i: 1, i: -1, t: -fl.hi}, 0))
    bits = u.active_bits(s.location)
    for k, bit in enumerate(bits):
        j = layout.copy_index(k)
        rows.append(_row(n, {d + j: 1, j: -1, t: -bit}, 0))
        rows.append(_row(n, {d + j: -1, j: 1, t: bit}, 0))
    rows.extend(_rect_rows(n, d, loc.invariant))
    rows.append(_row(n, {d + layout.timer_index: 1}, t_max))
    rows.append(_row(n, {t: -1}, 0))
    lifted = HPolytope(n, rows)
    out, st = eliminate_all(lifted, list(range(d)) + [t], mode)
    if stats is not None:
        stats.merge(st)
    if mode is not EliminationMode.FM_PLUS:
        out = remove_redundant(out)
    return SymbolicState(s.location, out)


def jump_successor(
    s: SymbolicState,
    jump_index: int,
    u: UnrolledRac,
    mode: EliminationMode = EliminationMode.FM_PLUS,
    stats: EliminationStats | None = None,
) -> SymbolicState:
    """Guard, reset and target invariant applied to ``s`` for one unrolled jump."""
    layout = StateLayout.of(u)
    _check(s, layout)
    jump = u.rac.jumps[jump_index]
    if jump.source != s.location:
        raise ValueError(f"jump {jump.label()} does not leave {s.location}")
    d = layout.dim
    p = s.polytope.with_constraints(_rect_rows(d, 0, jump.guard))
    reset_dims = [i for i, r in enumerate(jump.reset) if r is not None]
    if reset_dims and not is_empty(p):
        proj, st = eliminate_all(p, reset_dims, mode)
        if stats is not None:
            stats.merge(st)
        keep = [i for i in range(d) if i not in set(reset_dims)]
        p = proj.embed(d, keep)
        p = p.with_constraints(
            _rect_rows(d, 0, [r if r is not None else Interval() for r in jump.reset])
        )
    target = u.rac.location(jump.target)
    p = p.with_constraints(_rect_rows(d, 0, target.invariant))
    return SymbolicState(jump.target, remove_redundant(p))


@dataclass(frozen=True)
class ReachNode:
    index: int
    state: SymbolicState
    depth: int
    parent: int | None
    jump: int | None  # unrolled jump index on the incoming edge
    expired: frozenset[int]  # clock copies consumed on the path here


@dataclass
class ReachTree:
    unrolled: UnrolledRac
    layout: StateLayout
    t_max: Fraction
    jmp: int
    nodes: list[ReachNode] = field(default_factory=list)
    edges: list[tuple[int, int, int]] = field(default_factory=list)  # parent, jump, child
    stats: EliminationStats = field(default_factory=EliminationStats)
    warnings: list[str] = field(default_factory=list)

    @property
    def root(self) -> int:
        return 0

    def children(self, i: int) -> list[int]:
        return [c for p, _, c in self.edges if p == i]

    def original_location(self, i: int) -> str:
        return self.unrolled.origin[self.nodes[i].state.location]

    def location_path(self, i: int) -> tuple[str, ...]:
        return self.unrolled.path[self.nodes[i].state.location]


def _initial_state(u: UnrolledRac, root: str, layout: StateLayout) -> HPolytope:
    loc = u.rac.location(root)
    rows = _rect_rows(layout.dim, 0, loc.init) + _rect_rows(layout.dim, 0, loc.invariant)
    for k in range(len(layout.copies)):
        j = layout.copy_index(k)
        rows.append(_row(layout.dim, {j: 1}, 0))
        rows.append(_row(layout.dim, {j: -1}, 0))
    return HPolytope(layout.dim, rows)


def build_reach_tree(
    u: UnrolledRac,
    t_max,
    init_location: str | None = None,
    mode: EliminationMode = EliminationMode.FM_PLUS,
) -> ReachTree:
    """Breadth-first reach tree bounded by the time horizon and the jump bound."""
    t_max = as_scalar(t_max)
    layout = StateLayout.of(u)
    if init_location is None:
        roots = [
            r for r in u.roots if not any(iv.is_empty() for iv in u.rac.location(r).init)
        ]
        if len(roots) != 1:
            raise ModelError(
                f"expected exactly one initial location, found {[u.origin[r] for r in roots]}; "
                "choose one explicitly"
            )
        root = roots[0]
    else:
        matches = [r for r in u.roots if u.origin[r] == init_location]
        if not matches:
            raise ModelError(f"{init_location!r} is not an initial location")
        root = matches[0]

    tree = ReachTree(u, layout, t_max, u.jmp)
    start = _initial_state(u, root, layout)
    if is_empty(start) or t_max < 0:
        raise ModelError("the initial set is empty")
    first = time_successor(SymbolicState(root, start), u, t_max, mode, tree.stats)
    tree.nodes.append(ReachNode(0, first, 0, None, None, frozenset()))

    queue = deque([0])
    while queue:
        i = queue.popleft()
        node = tree.nodes[i]
        if node.depth >= u.jmp:
            continue
        for k, jump in enumerate(u.rac.jumps):
            if jump.source != node.state.location:
                continue
            post = jump_successor(node.state, k, u, mode, tree.stats)
            if is_empty(post.polytope):
                continue
            post = time_successor(post, u, t_max, mode, tree.stats)
            expired = node.expired
            if jump.stochastic:
                expired = expired | {layout.copies.index(jump.event)}
            child = ReachNode(len(tree.nodes), post, node.depth + 1, i, k, expired)
            tree.nodes.append(child)
            tree.edges.append((i, k, child.index))
            queue.append(child.index)
        if not tree.children(i) and u.rac.outgoing(node.state.location):
            timer = [_ZERO] * layout.dim
            timer[layout.timer_index] = Fraction(1)
            top = lp_optimize(node.state.polytope, timer, "max")
            if top.optimal and top.optimum < t_max:
                msg = (
                    f"node {i} ({u.origin[node.state.location]}) can neither reach the time "
                    "horizon nor take a jump"
                )
                tree.warnings.append(msg)
                log.warning(msg)
    return tree


@dataclass(frozen=True)
class GoalSpec:
    locations: frozenset[str]
    valuation: HPolytope | None = None  # over the original variables; None = everything


def goal_nodes(tree: ReachTree, goal: GoalSpec) -> list[tuple[int, HPolytope]]:
    out = []
    layout = tree.layout
    n_orig = layout.n_vars - 1
    extra = None
    if goal.valuation is not None:
        if goal.valuation.dim != n_orig:
            raise ValueError("goal valuation must range over the original variables")
        extra = goal.valuation.embed(layout.dim, range(n_orig))
    for node in tree.nodes:
        if tree.unrolled.origin[node.state.location] not in goal.locations:
            continue
        p = node.state.polytope if extra is None else intersect(node.state.polytope, extra)
        if not is_empty(p):
            out.append((node.index, p))
    return out


def project_and_lift(
    poly: HPolytope,
    layout: StateLayout,
    expired: frozenset[int] | set[int],
    t_int,
    mode: EliminationMode = EliminationMode.FM_PLUS,
    stats: EliminationStats | None = None,
) -> HPolytope:
    """Map a goal-state polytope onto sample space.

    Expired copies keep their frozen stopwatch value as the sample; for the
    others the sample can be anything between the stopwatch and ``t_int``.
    """
    t_int = as_scalar(t_int)
    m = len(layout.copies)
    watches, st = eliminate_all(poly, range(layout.n_vars), mode)
    if stats is not None:
        stats.merge(st)
    lifted_dims = [k for k in range(m) if k not in expired]
    # dims: stopwatches of unexpired copies get a sample dim appended
    n = m + len(lifted_dims)
    p = watches.embed(n, range(m))
    rows = []
    extra_pos = {}
    for pos, k in enumerate(lifted_dims):
        sdim = m + pos
        extra_pos[k] = sdim
        rows.append(_row(n, {k: 1, sdim: -1}, 0))
        rows.append(_row(n, {sdim: 1}, t_int))
    p = p.with_constraints(rows)
    if lifted_dims:
        p, st = eliminate_all(p, lifted_dims, mode)
        if stats is not None:
            stats.merge(st)
    # restore copy order: expired copies stayed in place, lifted ones moved to the end
    order = [k for k in range(m) if k in expired] + lifted_dims
    p = p.embed(m, order)
    clamp = [(0, t_int)] * m
    p = intersect(p, HPolytope.from_box(clamp))
    return remove_redundant(p)


@dataclass(frozen=True)
class ForwardRegion:
    members: tuple[HPolytope, ...]
    node_indices: tuple[int, ...]
    lifted: tuple[bool, ...]  # per sample dim: unexpired in some goal node
    copies: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.copies)

    @property
    def is_empty(self) -> bool:
        return not self.members


def assemble_forward_region(
    tree: ReachTree,
    goal: GoalSpec,
    t_int,
    mode: EliminationMode = EliminationMode.FM_PLUS,
) -> ForwardRegion:
    members, indices = [], []
    m = len(tree.layout.copies)
    lifted = [False] * m
    for i, poly in goal_nodes(tree, goal):
        expired = tree.nodes[i].expired
        region = project_and_lift(poly, tree.layout, expired, t_int, mode, tree.stats)
        if is_empty(region):
            continue
        members.append(region)
        indices.append(i)
        for k in range(m):
            if k not in expired:
                lifted[k] = True
    return ForwardRegion(tuple(members), tuple(indices), tuple(lifted), tree.layout.copies)
