"""Rectangular automata with random clocks: model types, checks, unrolling."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .polytope import as_scalar
from .stochastics import DistributionSpec

__all__ = [
    "Interval",
    "Location",
    "Jump",
    "Rac",
    "Violation",
    "ActivityVector",
    "ClockCopy",
    "UnrolledRac",
    "ModelError",
    "validate",
    "activity",
    "unroll",
]


class ModelError(ValueError):
    """The model is malformed or violates a structural requirement."""


@dataclass(frozen=True)
class Interval:
    """Closed interval; ``None`` marks an infinite end."""

    lo: Fraction | None = None
    hi: Fraction | None = None

    def __post_init__(self):
        if self.lo is not None:
            object.__setattr__(self, "lo", as_scalar(self.lo))
        if self.hi is not None:
            object.__setattr__(self, "hi", as_scalar(self.hi))

    @classmethod
    def point(cls, v) -> "Interval":
        return cls(v, v)

    @classmethod
    def universal(cls) -> "Interval":
        return cls(None, None)

    def is_empty(self) -> bool:
        return self.lo is not None and self.hi is not None and self.lo > self.hi

    def is_universal(self) -> bool:
        return self.lo is None and self.hi is None

    def contains(self, other: "Interval") -> bool:
        if other.is_empty():
            return True
        if self.lo is not None and (other.lo is None or other.lo < self.lo):
            return False
        if self.hi is not None and (other.hi is None or other.hi > self.hi):
            return False
        return True

    def contains_value(self, v) -> bool:
        v = as_scalar(v)
        return (self.lo is None or self.lo <= v) and (self.hi is None or v <= self.hi)

    def intersect(self, other: "Interval") -> "Interval":
        lo = other.lo if self.lo is None else self.lo if other.lo is None else max(self.lo, other.lo)
        hi = other.hi if self.hi is None else self.hi if other.hi is None else min(self.hi, other.hi)
        return Interval(lo, hi)

    def __str__(self) -> str:
        lo = "-inf" if self.lo is None else str(self.lo)
        hi = "inf" if self.hi is None else str(self.hi)
        return f"[{lo}, {hi}]"


Rect = tuple[Interval, ...]


def _universal(n: int) -> Rect:
    return tuple(Interval() for _ in range(n))


@dataclass(frozen=True)
class Location:
    name: str
    invariant: Rect
    flow: Rect
    init: Rect | None = None  # None: not an initial location

    @property
    def is_initial(self) -> bool:
        return self.init is not None


@dataclass(frozen=True)
class Jump:
    source: str
    target: str
    guard: Rect
    reset: tuple[Interval | None, ...]  # None keeps the value (identity reset)
    event: str | None = None  # random clock label for stochastic jumps

    @property
    def stochastic(self) -> bool:
        return self.event is not None

    def label(self) -> str:
        tag = f" [{self.event}]" if self.event else ""
        return f"{self.source}->{self.target}{tag}"


@dataclass(frozen=True)
class Rac:
    variables: tuple[str, ...]
    locations: tuple[Location, ...]
    jumps: tuple[Jump, ...]
    clocks: tuple[str, ...] = ()
    distributions: Mapping[str, DistributionSpec] = field(default_factory=dict)

    def location(self, name: str) -> Location:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise KeyError(name)

    def outgoing(self, name: str) -> list[int]:
        return [k for k, j in enumerate(self.jumps) if j.source == name]

    @property
    def initial_locations(self) -> tuple[str, ...]:
        return tuple(l.name for l in self.locations if l.is_initial)


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" or "warning"
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.where}: {self.message}"


def _rect_str(names: Sequence[str], rect: Rect) -> str:
    return ", ".join(f"{n} in {iv}" for n, iv in zip(names, rect) if not iv.is_universal()) or "true"


def validate(m: Rac) -> list[Violation]:
    """Check the structural requirements of a model; an empty list means valid."""
    out: list[Violation] = []

    def err(where, msg):
        out.append(Violation("error", where, msg))

    d = len(m.variables)
    if len(set(m.variables)) != d:
        err("variables", "duplicate variable names")
    if len(set(m.clocks)) != len(m.clocks):
        err("clocks", "duplicate clock names")
    clash = set(m.variables) & set(m.clocks)
    if clash:
        err("clocks", f"names used both as variable and clock: {sorted(clash)}")
    for r in m.clocks:
        if r not in m.distributions:
            err(f"clock {r}", "no distribution assigned")
    for r in m.distributions:
        if r not in m.clocks:
            err(f"clock {r}", "distribution for an undeclared clock")

    names = [l.name for l in m.locations]
    if len(set(names)) != len(names):
        err("locations", "duplicate location names")
    if not m.locations:
        err("locations", "model has no locations")

    any_init = False
    for loc in m.locations:
        where = f"location {loc.name}"
        for what, rect in (("invariant", loc.invariant), ("flow", loc.flow), ("init", loc.init)):
            if rect is not None and len(rect) != d:
                err(where, f"{what} has {len(rect)} intervals for {d} variables")
        if len(loc.invariant) != d or len(loc.flow) != d:
            continue
        if any(iv.is_empty() for iv in loc.flow):
            err(where, "flow is empty")
        if any(iv.is_empty() for iv in loc.invariant):
            err(where, "invariant is empty")
        if loc.init is not None and len(loc.init) == d:
            if not any(iv.is_empty() for iv in loc.init):
                any_init = True
                if not all(inv.contains(iv) for inv, iv in zip(loc.invariant, loc.init)):
                    err(where, "initial set is not contained in the invariant")
    if m.locations and not any_init:
        err("locations", "no location has a nonempty initial set")

    by_name = {l.name: l for l in m.locations}
    for k, j in enumerate(m.jumps):
        where = f"jump #{k} ({j.label()})"
        src, dst = by_name.get(j.source), by_name.get(j.target)
        if src is None or dst is None:
            err(where, "unknown source or target location")
            continue
        if len(j.guard) != d or len(j.reset) != d:
            err(where, "guard/reset arity does not match the variables")
            continue
        if j.event is not None and j.event not in m.clocks:
            err(where, f"event {j.event!r} is not a declared clock")
        for var, g in zip(m.variables, j.guard):
            if g.is_empty():
                err(where, f"guard interval of {var} is empty ({g.lo} > {g.hi})")
        if j.stochastic:
            if not all(g.is_universal() for g in j.guard):
                err(where, "stochastic jump guard not universal")
        elif not all(inv.contains(g) for inv, g in zip(src.invariant, j.guard)):
            err(where, "guard is not contained in the source invariant")
        for i, r in enumerate(j.reset):
            var = m.variables[i]
            if r is None:
                # identity: the value must stay admissible in the target
                if not dst.invariant[i].contains(j.guard[i].intersect(src.invariant[i])):
                    err(where, f"identity reset of {var} can leave the target invariant")
            else:
                if r.is_empty():
                    err(where, f"reset interval of {var} is empty")
                elif not dst.invariant[i].contains(r):
                    err(where, f"reset interval of {var} is not inside the target invariant")

    if not out:
        out.extend(_nonblocking_warnings(m))
    return out


def _nonblocking_warnings(m: Rac) -> list[Violation]:
    """Syntactic sufficient check that time can always pass or a jump is enabled.

    A bounded invariant face is fine if the flow can stay inside (slope of the
    right sign available) or a nonstochastic jump's guard covers that face.
    """
    out = []
    for loc in m.locations:
        guards = [m.jumps[k].guard for k in m.outgoing(loc.name) if not m.jumps[k].stochastic]
        for i, (inv, fl) in enumerate(zip(loc.invariant, loc.flow)):
            faces = []
            if inv.hi is not None and (fl.lo is not None and fl.lo > 0):
                faces.append(("upper", inv.hi))
            if inv.lo is not None and (fl.hi is not None and fl.hi < 0):
                faces.append(("lower", inv.lo))
            for side, value in faces:
                covered = any(
                    g[i].contains_value(value)
                    and all(g[k].contains(inv_k) for k, inv_k in enumerate(loc.invariant) if k != i)
                    for g in guards
                )
                if not covered:
                    out.append(
                        Violation(
                            "warning",
                            f"location {loc.name}",
                            f"may block at the {side} face {m.variables[i]} = {value}",
                        )
                    )
    return out


@dataclass(frozen=True)
class ActivityVector:
    clocks: tuple[str, ...]
    bits: Mapping[str, tuple[int, ...]]

    def active(self, location: str, clock: str) -> bool:
        return bool(self.bits[location][self.clocks.index(clock)])


def activity(m: Rac) -> ActivityVector:
    """Per location, which random clocks run (slope 1) and which are frozen."""
    bits = {}
    for loc in m.locations:
        events = {m.jumps[k].event for k in m.outgoing(loc.name) if m.jumps[k].stochastic}
        bits[loc.name] = tuple(1 if r in events else 0 for r in m.clocks)
    return ActivityVector(m.clocks, bits)


@dataclass(frozen=True)
class ClockCopy:
    clock: str
    index: int
    name: str


@dataclass(frozen=True)
class UnrolledRac:
    """Loop-free expansion of a model with one clock copy per stochastic event.

    ``rac`` is itself a model whose variables are the original ones plus the
    global timer, whose clocks are the copies and whose locations form a
    forest rooted at the original initial locations.
    """

    rac: Rac
    original: Rac
    jmp: int
    timer: str
    copies: tuple[ClockCopy, ...]
    origin: Mapping[str, str]  # unrolled location -> original location
    path: Mapping[str, tuple[str, ...]]  # original location names from the root
    depth: Mapping[str, int]
    roots: tuple[str, ...]
    jump_origin: tuple[int, ...]  # unrolled jump -> original jump index
    active: Mapping[str, frozenset[int]]  # running clock copies per location

    def active_bits(self, location: str) -> tuple[int, ...]:
        on = self.active[location]
        return tuple(1 if k in on else 0 for k in range(len(self.copies)))

    @property
    def stochastic_dim(self) -> int:
        return len(self.copies)

    def copy_distribution(self, k: int) -> DistributionSpec:
        return self.original.distributions[self.copies[k].clock]

    @property
    def distributions(self) -> list[DistributionSpec]:
        return [self.copy_distribution(k) for k in range(len(self.copies))]


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    k = 0
    while name in taken:
        k += 1
        name = f"{base}_{k}" if k > 1 else f"{base}_g"
    return name


def unroll(m: Rac, jmp: int) -> UnrolledRac:
    """Unfold ``m`` into a tree of depth ``jmp`` with fresh clock copies.

    Every path takes at most ``jmp`` jumps, so ``jmp + 1`` copies per clock
    suffice; a stochastic jump consumes the current copy of its clock and
    later locations on the path use the next one.
    """
    if jmp < 0:
        raise ValueError("jump bound must be nonnegative")
    errors = [v for v in validate(m) if v.severity == "error"]
    if errors:
        raise ModelError("; ".join(map(str, errors)))

    taken = set(m.variables) | set(m.clocks)
    copies: list[ClockCopy] = []
    copy_name: dict[tuple[str, int], str] = {}
    for r in m.clocks:
        for i in range(jmp + 1):
            name = _fresh(f"{r}_{i}", taken)
            taken.add(name)
            copy_name[r, i] = name
            copies.append(ClockCopy(r, i, name))
    timer = _fresh("T", taken)
    variables = tuple(m.variables) + (timer,)

    locations: list[Location] = []
    jumps: list[Jump] = []
    jump_origin: list[int] = []
    origin: dict[str, str] = {}
    path: dict[str, tuple[str, ...]] = {}
    depth: dict[str, int] = {}
    roots: list[str] = []
    active: dict[str, frozenset[int]] = {}
    copy_pos = {(c.clock, c.index): k for k, c in enumerate(copies)}
    bits = activity(m)
    counter = 0

    def add_location(orig: Location, is_root: bool, p: tuple[str, ...], dep: int, cur) -> str:
        nonlocal counter
        name = f"{orig.name}#{counter}"
        counter += 1
        init = orig.init + (Interval.point(0),) if is_root else None
        locations.append(
            Location(
                name,
                orig.invariant + (Interval(),),
                orig.flow + (Interval.point(1),),
                init,
            )
        )
        origin[name] = orig.name
        path[name] = p
        depth[name] = dep
        active[name] = frozenset(
            copy_pos[r, cur[r]] for r in m.clocks if bits.active(orig.name, r)
        )
        return name

    queue: deque = deque()
    for loc in m.locations:
        if loc.is_initial:
            start = {r: 0 for r in m.clocks}
            name = add_location(loc, True, (loc.name,), 0, start)
            roots.append(name)
            queue.append((name, loc, start))
    while queue:
        uname, loc, current = queue.popleft()
        if depth[uname] >= jmp:
            continue
        for k in m.outgoing(loc.name):
            j = m.jumps[k]
            nxt = dict(current)
            event = None
            if j.stochastic:
                event = copy_name[j.event, current[j.event]]
                nxt[j.event] = current[j.event] + 1
            tgt = m.location(j.target)
            child = add_location(tgt, False, path[uname] + (tgt.name,), depth[uname] + 1, nxt)
            jumps.append(Jump(uname, child, j.guard + (Interval(),), j.reset + (None,), event))
            jump_origin.append(k)
            queue.append((child, tgt, nxt))

    # leaves keep the clocks of their original location running even though
    # no stochastic jump leaves them in the tree
    rac = Rac(
        variables,
        tuple(locations),
        tuple(jumps),
        tuple(c.name for c in copies),
        {c.name: m.distributions[c.clock] for c in copies},
    )
    return UnrolledRac(
        rac=rac,
        original=m,
        jmp=jmp,
        timer=timer,
        copies=tuple(copies),
        origin=origin,
        path=path,
        depth=depth,
        roots=tuple(roots),
        jump_origin=tuple(jump_origin),
        active=active,
    )
