"""Existential quantifier elimination over linear constraint systems."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .polytope import HPolytope, LinearConstraint, remove_redundant

__all__ = [
    "EliminationMode",
    "EliminationStats",
    "NoEquationError",
    "find_equation",
    "eliminate_gauss",
    "eliminate_fm",
    "eliminate_all",
    "project_onto",
]


class EliminationMode(enum.Enum):
    FM = "fm"
    FM_PLUS = "fm+"

    @classmethod
    def parse(cls, text: str) -> "EliminationMode":
        for mode in cls:
            if mode.value == text.lower():
                return mode
        raise ValueError(f"unknown elimination mode {text!r} (use 'fm' or 'fm+')")


@dataclass
class EliminationStats:
    max_intermediate_constraints: int = 0
    eliminations_performed: int = 0
    gauss_steps: int = 0

    def record(self, n: int) -> None:
        self.max_intermediate_constraints = max(self.max_intermediate_constraints, n)
        self.eliminations_performed += 1

    def merge(self, other: "EliminationStats") -> None:
        self.max_intermediate_constraints = max(
            self.max_intermediate_constraints, other.max_intermediate_constraints
        )
        self.eliminations_performed += other.eliminations_performed
        self.gauss_steps += other.gauss_steps


class NoEquationError(ValueError):
    """The variable does not occur in any equation; use Fourier-Motzkin."""


def _drop(coeffs: Sequence[Fraction], var: int) -> tuple[Fraction, ...]:
    return tuple(coeffs[:var]) + tuple(coeffs[var + 1 :])


def find_equation(p: HPolytope, var: int) -> LinearConstraint | None:
    """A non-strict row ``a.x <= b`` on ``var`` whose mirror ``-a.x <= -b`` is present."""
    by_coeffs = {c.coeffs: c for c in p.constraints if not c.strict}
    for c in p.constraints:
        if c.strict or c.coeffs[var] == 0:
            continue
        twin = by_coeffs.get(tuple(-a for a in c.coeffs))
        if twin is not None and twin.bound == -c.bound:
            return c
    return None


def eliminate_gauss(p: HPolytope, var: int) -> HPolytope:
    eq = find_equation(p, var)
    if eq is None:
        raise NoEquationError(f"no equation on dimension {var}")
    return _substitute(p, var, eq)


def _substitute(p: HPolytope, var: int, eq: LinearConstraint) -> HPolytope:
    a_v = eq.coeffs[var]
    rows = []
    for c in p.constraints:
        f = c.coeffs[var]
        if f == 0:
            rows.append(LinearConstraint(_drop(c.coeffs, var), c.bound, c.strict))
            continue
        k = f / a_v
        coeffs = tuple(x - k * y for x, y in zip(c.coeffs, eq.coeffs))
        rows.append(LinearConstraint(_drop(coeffs, var), c.bound - k * eq.bound, c.strict))
    return HPolytope(p.dim - 1, rows)


def _fm_rows(p: HPolytope, var: int) -> list[LinearConstraint]:
    lower, upper, rows = [], [], []
    for c in p.constraints:
        a = c.coeffs[var]
        if a > 0:
            upper.append(c)
        elif a < 0:
            lower.append(c)
        else:
            rows.append(LinearConstraint(_drop(c.coeffs, var), c.bound, c.strict))
    for u in upper:
        au = u.coeffs[var]
        for lo in lower:
            al = -lo.coeffs[var]
            coeffs = tuple(al * x + au * y for x, y in zip(u.coeffs, lo.coeffs))
            rows.append(
                LinearConstraint(_drop(coeffs, var), al * u.bound + au * lo.bound, u.strict or lo.strict)
            )
    return rows


def eliminate_fm(p: HPolytope, var: int) -> HPolytope:
    """Fourier-Motzkin: pair every lower bound on ``var`` with every upper bound."""
    return HPolytope(p.dim - 1, _fm_rows(p, var))


def eliminate_all(
    p: HPolytope,
    variables: Iterable[int],
    mode: EliminationMode = EliminationMode.FM_PLUS,
    order: Sequence[int] | None = None,
    on_step: Callable[[int, HPolytope], None] | None = None,
) -> tuple[HPolytope, EliminationStats]:
    """Project ``p`` onto the dimensions not listed in ``variables``.

    Each variable is removed by Gauss substitution when an equation on it is
    present, otherwise by Fourier-Motzkin.  In ``FM_PLUS`` mode redundant
    rows are removed after every single elimination.  ``on_step`` receives
    the original index of the eliminated variable and the system that the
    next step starts from.
    """
    targets = set(variables)
    for v in targets:
        if not 0 <= v < p.dim:
            raise IndexError(f"dimension {v} out of range for {p.dim}-dim polytope")
    seq = list(order) if order is not None else sorted(targets)
    if set(seq) != targets:
        raise ValueError("order must list exactly the variables to eliminate")
    stats = EliminationStats()
    positions = list(range(p.dim))
    cur = p
    # substituting an equation maps the set bijectively onto its projection,
    # so an irredundant system stays irredundant under a Gauss step
    clean = False
    for v in seq:
        idx = positions.index(v)
        gauss = False
        if cur._empty_hint:
            cur = HPolytope.empty(cur.dim - 1)
        else:
            eq = find_equation(cur, idx)
            if eq is not None:
                cur = _substitute(cur, idx, eq)
                stats.gauss_steps += 1
                gauss = True
            else:
                cur = HPolytope(cur.dim - 1, _fm_rows(cur, idx))
        stats.record(len(cur.constraints))
        if mode is EliminationMode.FM_PLUS and not (gauss and clean):
            cur = remove_redundant(cur)
            clean = True
        positions.pop(idx)
        if on_step is not None:
            on_step(v, cur)
    return cur, stats


def project_onto(
    p: HPolytope, keep: Iterable[int], mode: EliminationMode = EliminationMode.FM_PLUS
) -> tuple[HPolytope, EliminationStats]:
    keep = set(keep)
    return eliminate_all(p, [i for i in range(p.dim) if i not in keep], mode)
