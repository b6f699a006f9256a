"""Exact convex polyhedra in H- and V-representation.

All coordinates are :class:`fractions.Fraction`.  Strict rows are carried as
a flag: optimisation works on the topological closure, while emptiness and
point membership honour strictness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import lp
from ._dd import cone_generators

__all__ = [
    "Scalar",
    "as_scalar",
    "DimensionError",
    "EmptyPolytopeError",
    "LinearConstraint",
    "HPolytope",
    "VPolytope",
    "Box",
    "LPResult",
    "lp_optimize",
    "is_empty",
    "intersect",
    "is_redundant",
    "remove_redundant",
    "to_vrep",
    "to_hrep",
    "bounding_box",
    "contains_point",
    "contains_point_exact",
    "is_subset",
    "set_equal",
]

Scalar = Fraction


def as_scalar(value) -> Fraction:
    """Convert ints, decimal strings, ``"p/q"`` strings or floats exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite scalar {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


class DimensionError(ValueError):
    pass


class EmptyPolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class LinearConstraint:
    """``coeffs . x <= bound`` (or ``<`` when ``strict``)."""

    coeffs: tuple[Fraction, ...]
    bound: Fraction
    strict: bool = False

    @classmethod
    def make(cls, coeffs: Iterable, bound, strict: bool = False) -> "LinearConstraint":
        return cls(tuple(as_scalar(c) for c in coeffs), as_scalar(bound), bool(strict))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    def is_tautology(self) -> bool:
        return self.is_trivial() and (self.bound > 0 or (self.bound == 0 and not self.strict))

    def is_contradiction(self) -> bool:
        return self.is_trivial() and not self.is_tautology()

    def normalized(self) -> "LinearConstraint":
        """Scale so the first nonzero coefficient is +1 or -1."""
        lead = next((c for c in self.coeffs if c != 0), None)
        if lead is None or abs(lead) == 1:
            return self
        s = 1 / abs(lead)
        return LinearConstraint(tuple(c * s for c in self.coeffs), self.bound * s, self.strict)

    def negated(self) -> "LinearConstraint":
        """The complement halfspace (strictness flips)."""
        return LinearConstraint(tuple(-c for c in self.coeffs), -self.bound, not self.strict)

    def evaluate(self, point: Sequence) -> Fraction:
        return sum((c * as_scalar(p) for c, p in zip(self.coeffs, point) if c), Fraction(0))

    def satisfied_by(self, point: Sequence) -> bool:
        lhs = self.evaluate(point)
        return lhs < self.bound if self.strict else lhs <= self.bound

    def __str__(self) -> str:
        terms = [f"{c}*x{i}" for i, c in enumerate(self.coeffs) if c]
        op = "<" if self.strict else "<="
        return f"{' + '.join(terms) or '0'} {op} {self.bound}"


class HPolytope:
    """Intersection of finitely many (possibly strict) halfspaces.

    The constructor normalises rows, drops tautologies, collapses parallel
    duplicates to the tightest one and replaces the whole system by a single
    ``0 <= -1`` row if a contradiction is present.
    """

    __slots__ = ("dim", "constraints", "_empty_hint")

    def __init__(self, dim: int, constraints: Iterable[LinearConstraint] = ()):
        self.dim = int(dim)
        rows: dict[tuple[Fraction, ...], LinearConstraint] = {}
        contradiction = False
        for c in constraints:
            if c.dim != self.dim:
                raise DimensionError(f"constraint of dim {c.dim} in {self.dim}-dim polytope")
            if c.is_trivial():
                if c.is_contradiction():
                    contradiction = True
                continue
            c = c.normalized()
            old = rows.get(c.coeffs)
            if old is None:
                rows[c.coeffs] = c
            elif c.bound < old.bound or (c.bound == old.bound and c.strict and not old.strict):
                rows[c.coeffs] = c
        if contradiction:
            self.constraints: tuple[LinearConstraint, ...] = (
                LinearConstraint((Fraction(0),) * self.dim, Fraction(-1)),
            )
            self._empty_hint = True
        else:
            self.constraints = tuple(rows.values())
            self._empty_hint = False

    # construction helpers

    @classmethod
    def universe(cls, dim: int) -> "HPolytope":
        return cls(dim, ())

    @classmethod
    def empty(cls, dim: int) -> "HPolytope":
        return cls(dim, [LinearConstraint((Fraction(0),) * dim, Fraction(-1))])

    @classmethod
    def from_box(cls, bounds: Sequence[tuple]) -> "HPolytope":
        """``bounds[i] = (lo, hi)`` with ``None`` for an infinite end."""
        dim = len(bounds)
        rows = []
        for i, (lo, hi) in enumerate(bounds):
            if lo is not None:
                rows.append(_axis_row(dim, i, -1, -as_scalar(lo)))
            if hi is not None:
                rows.append(_axis_row(dim, i, 1, as_scalar(hi)))
        return cls(dim, rows)

    @classmethod
    def from_rows(cls, A, b, strict: Sequence[bool] | None = None) -> "HPolytope":
        A = [list(r) for r in A]
        dim = len(A[0]) if A else 0
        strict = strict or [False] * len(A)
        return cls(dim, [LinearConstraint.make(r, bi, s) for r, bi, s in zip(A, b, strict)])

    # structural operations

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __repr__(self) -> str:
        return f"HPolytope(dim={self.dim}, constraints=[{'; '.join(map(str, self.constraints))}])"

    def has_strict(self) -> bool:
        return any(c.strict for c in self.constraints)

    def matrix(self) -> tuple[list[list[Fraction]], list[Fraction]]:
        return [list(c.coeffs) for c in self.constraints], [c.bound for c in self.constraints]

    def with_constraints(self, extra: Iterable[LinearConstraint]) -> "HPolytope":
        return HPolytope(self.dim, list(self.constraints) + list(extra))

    def closure(self) -> "HPolytope":
        return HPolytope(self.dim, [LinearConstraint(c.coeffs, c.bound) for c in self.constraints])

    def embed(self, new_dim: int, positions: Sequence[int]) -> "HPolytope":
        """Cylindrify into ``new_dim`` dims; old dim ``i`` moves to ``positions[i]``."""
        if len(positions) != self.dim:
            raise DimensionError("positions must map every dimension")
        rows = []
        for c in self.constraints:
            coeffs = [Fraction(0)] * new_dim
            for i, a in enumerate(c.coeffs):
                coeffs[positions[i]] = a
            rows.append(LinearConstraint(tuple(coeffs), c.bound, c.strict))
        if self._empty_hint:
            return HPolytope.empty(new_dim)
        return HPolytope(new_dim, rows)

    def insert_dims(self, at: int, count: int = 1) -> "HPolytope":
        """Add ``count`` unconstrained dimensions before index ``at``."""
        positions = [i if i < at else i + count for i in range(self.dim)]
        return self.embed(self.dim + count, positions)

    def drop_free_dims(self, dims: Sequence[int]) -> "HPolytope":
        """Delete dimensions that no constraint mentions."""
        dims = set(dims)
        for c in self.constraints:
            if any(c.coeffs[d] for d in dims):
                raise DimensionError("dimension is constrained")
        keep = [i for i in range(self.dim) if i not in dims]
        if self._empty_hint:
            return HPolytope.empty(len(keep))
        return HPolytope(
            len(keep),
            [LinearConstraint(tuple(c.coeffs[i] for i in keep), c.bound, c.strict) for c in self.constraints],
        )

    def same_constraints(self, other: "HPolytope") -> bool:
        return self.dim == other.dim and set(self.constraints) == set(other.constraints)


def _axis_row(dim: int, i: int, sign: int, bound: Fraction) -> LinearConstraint:
    coeffs = [Fraction(0)] * dim
    coeffs[i] = Fraction(sign)
    return LinearConstraint(tuple(coeffs), bound)


@dataclass(frozen=True)
class VPolytope:
    """``conv(vertices) + cone(rays)``."""

    dim: int
    vertices: tuple[tuple[Fraction, ...], ...]
    rays: tuple[tuple[Fraction, ...], ...] = ()

    def is_bounded(self) -> bool:
        return not self.rays


@dataclass(frozen=True)
class Box:
    """Per-dimension intervals; ``None`` marks an infinite end."""

    intervals: tuple[tuple[Fraction | None, Fraction | None], ...]
    empty: bool = False

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def lo(self, i: int):
        return self.intervals[i][0]

    def hi(self, i: int):
        return self.intervals[i][1]


@dataclass(frozen=True)
class LPResult:
    status: lp.LPStatus
    optimum: Fraction | None = None
    witness: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is lp.LPStatus.OPTIMAL


def _check_dim(p: HPolytope, n: int) -> None:
    if p.dim != n:
        raise DimensionError(f"expected dimension {p.dim}, got {n}")


def lp_optimize(p: HPolytope, objective: Sequence, sense: str = "max") -> LPResult:
    """Optimise a linear objective over the closure of ``p``."""
    obj = [as_scalar(v) for v in objective]
    _check_dim(p, len(obj))
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    if p._empty_hint:
        return LPResult(lp.LPStatus.INFEASIBLE)
    A, b = p.matrix()
    c = obj if sense == "max" else [-v for v in obj]
    res = lp.maximize(A, b, c)
    if res.status is not lp.LPStatus.OPTIMAL:
        return LPResult(res.status)
    value = res.value if sense == "max" else -res.value
    return LPResult(res.status, value, res.x)


def is_empty(p: HPolytope) -> bool:
    if p._empty_hint:
        return True
    A, b = p.matrix()
    if not p.has_strict():
        return not lp.is_feasible(A, b)
    # maximise a common slack eps on the strict rows, capped at 1
    rows = [r + [Fraction(1 if c.strict else 0)] for r, c in zip(A, p.constraints)]
    rows.append([Fraction(0)] * p.dim + [Fraction(1)])
    rhs = b + [Fraction(1)]
    res = lp.maximize(rows, rhs, [Fraction(0)] * p.dim + [Fraction(1)])
    if res.status is not lp.LPStatus.OPTIMAL:
        return True
    return res.value <= 0


def intersect(p: HPolytope, q: HPolytope) -> HPolytope:
    if p.dim != q.dim:
        raise DimensionError(f"cannot intersect dims {p.dim} and {q.dim}")
    return HPolytope(p.dim, p.constraints + q.constraints)


def _redundant_against(rest: list[LinearConstraint], c: LinearConstraint, dim: int) -> bool:
    # assumes rest (with strictness) is nonempty
    A = [list(r.coeffs) for r in rest]
    b = [r.bound for r in rest]
    res = lp.maximize(A, b, list(c.coeffs), known_feasible=True, witness=False)
    if res.status is lp.LPStatus.UNBOUNDED:
        return False
    if res.status is lp.LPStatus.INFEASIBLE:
        return True
    if res.value < c.bound:
        return True
    if res.value > c.bound:
        return False
    if not c.strict:
        return True
    # supremum equals the strict bound: redundant iff the face is not reached
    return is_empty(HPolytope(dim, rest + [c.negated()]))


def is_redundant(p: HPolytope, index: int) -> bool:
    """Whether dropping constraint ``index`` leaves the represented set unchanged."""
    rows = list(p.constraints)
    c = rows.pop(index)
    if is_empty(p):
        return True
    return _redundant_against(rows, c, p.dim)


def remove_redundant(p: HPolytope) -> HPolytope:
    """Minimal H-representation of the same set.

    Constraints are tested in order against the rows still retained, so
    every surviving row is irredundant with respect to the final system.
    """
    if is_empty(p):
        return HPolytope.empty(p.dim)
    kept = list(p.constraints)
    i = 0
    while i < len(kept):
        rest = kept[:i] + kept[i + 1 :]
        if _redundant_against(rest, kept[i], p.dim):
            kept = rest
        else:
            i += 1
    return HPolytope(p.dim, kept)


def _int_row(values: Sequence[Fraction]) -> list[int]:
    den = 1
    for v in values:
        den = math.lcm(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in values]


def to_vrep(p: HPolytope) -> VPolytope:
    """Vertex/ray enumeration of the closure of ``p``."""
    if is_empty(p):
        raise EmptyPolytopeError("vertex enumeration of an empty polytope")
    n = p.dim
    rows = [[0] * n + [-1]]
    for c in p.constraints:
        rows.append(_int_row(list(c.coeffs) + [-c.bound]))
    lin, rays = cone_generators(rows, n + 1)
    vertices: list[tuple[Fraction, ...]] = []
    directions: list[tuple[Fraction, ...]] = []
    for l in lin:
        directions.append(tuple(Fraction(x) for x in l[:n]))
        directions.append(tuple(Fraction(-x) for x in l[:n]))
    for r in rays:
        t = r[n]
        if t > 0:
            vertices.append(tuple(Fraction(x, t) for x in r[:n]))
        else:
            directions.append(tuple(Fraction(x) for x in r[:n]))
    if not vertices:
        # a cone through the origin only occurs with lineality; pick any point
        res = lp_optimize(p, [0] * n)
        vertices.append(res.witness)
    return VPolytope(n, tuple(dict.fromkeys(vertices)), tuple(dict.fromkeys(directions)))


def to_hrep(v: VPolytope) -> HPolytope:
    """Facet enumeration of ``conv(vertices) + cone(rays)``."""
    n = v.dim
    if not v.vertices:
        if v.rays:
            raise EmptyPolytopeError("a V-polytope with rays needs at least one vertex")
        return HPolytope.empty(n)
    # polar cone over (a, beta): a.x - beta <= 0 for every generator
    rows = []
    for x in v.vertices:
        rows.append(_int_row([as_scalar(c) for c in x] + [Fraction(-1)]))
    for r in v.rays:
        rows.append(_int_row([as_scalar(c) for c in r] + [Fraction(0)]))
    lin, rays = cone_generators(rows, n + 1)
    cons = []
    for l in lin:
        a = tuple(Fraction(x) for x in l[:n])
        cons.append(LinearConstraint(a, Fraction(l[n])))
        cons.append(LinearConstraint(tuple(-x for x in a), Fraction(-l[n])))
    for r in rays:
        cons.append(LinearConstraint(tuple(Fraction(x) for x in r[:n]), Fraction(r[n])))
    return HPolytope(n, cons)


def bounding_box(p: HPolytope) -> Box:
    """Tight per-dimension bounds (exact LP minima and maxima)."""
    if is_empty(p):
        raise EmptyPolytopeError("bounding box of an empty polytope")
    intervals = []
    for i in range(p.dim):
        e = [0] * p.dim
        e[i] = 1
        hi = lp_optimize(p, e, "max")
        lo = lp_optimize(p, e, "min")
        intervals.append((lo.optimum if lo.optimal else None, hi.optimum if hi.optimal else None))
    return Box(tuple(intervals))


def contains_point(p: HPolytope, pt: Sequence[float]) -> bool:
    """Float membership, strict rows honoured, no tolerance."""
    if len(pt) != p.dim:
        raise DimensionError("point dimension mismatch")
    for c in p.constraints:
        lhs = sum(float(a) * float(x) for a, x in zip(c.coeffs, pt) if a)
        b = float(c.bound)
        if lhs > b or (c.strict and lhs == b):
            return False
    return True


def contains_point_exact(p: HPolytope, pt: Sequence) -> bool:
    if len(pt) != p.dim:
        raise DimensionError("point dimension mismatch")
    return all(c.satisfied_by(pt) for c in p.constraints)


def is_subset(p: HPolytope, q: HPolytope) -> bool:
    """``closure(p) ⊆ closure(q)`` decided by one LP per row of ``q``."""
    if p.dim != q.dim:
        raise DimensionError("dimension mismatch")
    if is_empty(p):
        return True
    for c in q.constraints:
        res = lp_optimize(p, c.coeffs, "max")
        if not res.optimal or res.optimum > c.bound:
            return False
    return True


def set_equal(p: HPolytope, q: HPolytope) -> bool:
    return is_subset(p, q) and is_subset(q, p)
