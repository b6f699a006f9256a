"""Exact linear programming over the rationals.

The core solver handles standard-form problems ``min c.y  s.t.  M y = q,
y >= 0`` with a two-phase simplex using Bland's rule.  The tableau is kept
fraction-free: every entry is an integer and the true value is the entry
divided by a common denominator (the current basis determinant), so each
pivot only needs exact integer division.

Inequality-form problems ``max c.x  s.t.  A x <= b`` with free ``x`` are
solved through their duals, which keeps the tableau height equal to the
number of variables rather than the number of constraints.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

__all__ = [
    "LPStatus",
    "StandardResult",
    "InequalityResult",
    "solve_standard",
    "maximize",
    "is_feasible",
    "solve_square",
]


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class StandardResult:
    status: LPStatus
    value: Fraction | None = None
    y: tuple[Fraction, ...] | None = None
    basis: tuple[int, ...] = ()
    rows: tuple[int, ...] = ()


@dataclass(frozen=True)
class InequalityResult:
    status: LPStatus
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None


def _scale_to_ints(values: Sequence[Fraction]) -> list[int]:
    den = 1
    for v in values:
        den = lcm(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in values]


class _Tableau:
    """Fraction-free simplex tableau.

    ``rows[i]`` holds ``n`` structural columns, ``m`` artificial columns and
    the right-hand side.  ``obj`` is the reduced-cost row.  True values are
    ``entry / det``.
    """

    def __init__(self, rows: list[list[int]], basis: list[int], n: int):
        self.rows = rows
        self.basis = basis
        self.n = n
        self.det = 1
        self.obj: list[int] = []

    def pivot(self, r: int, s: int) -> None:
        rows = self.rows
        prow = rows[r]
        piv = prow[s]
        det = self.det
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[s]
            if f == 0:
                if piv != det:
                    rows[i] = [x * piv // det for x in row]
            else:
                rows[i] = [(x * piv - f * y) // det for x, y in zip(row, prow)]
        f = self.obj[s]
        if f == 0:
            if piv != det:
                self.obj = [x * piv // det for x in self.obj]
        else:
            self.obj = [(x * piv - f * y) // det for x, y in zip(self.obj, prow)]
        self.basis[r] = s
        if piv < 0:
            # keep det > 0; (T, d) and (-T, -d) represent the same tableau
            self.rows = [[-x for x in row] for row in self.rows]
            self.obj = [-x for x in self.obj]
            piv = -piv
        self.det = piv

    def run(self, allowed: int) -> bool:
        """Minimise with Bland's rule over columns ``< allowed``.

        Returns False when the objective is unbounded below.
        """
        while True:
            obj = self.obj
            s = -1
            for j in range(allowed):
                if obj[j] < 0:
                    s = j
                    break
            if s < 0:
                return True
            r = -1
            best_num = best_den = 0
            for i, row in enumerate(self.rows):
                a = row[s]
                if a <= 0:
                    continue
                num = row[-1]
                if r < 0:
                    r, best_num, best_den = i, num, a
                    continue
                lhs = num * best_den
                rhs = best_num * a
                if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[r]):
                    r, best_num, best_den = i, num, a
            if r < 0:
                return False
            self.pivot(r, s)


def solve_standard(
    M: Sequence[Sequence[Fraction]], q: Sequence[Fraction], c: Sequence[Fraction]
) -> StandardResult:
    """Minimise ``c.y`` subject to ``M y = q`` and ``y >= 0``.

    On success ``basis`` lists the basic structural columns and ``rows`` the
    constraint rows they are paired with (linearly dependent rows are
    dropped, so ``len(rows)`` may be smaller than ``len(M)``).
    """
    m = len(M)
    n = len(c)
    rows: list[list[int]] = []
    for i in range(m):
        row = list(M[i])
        row.append(q[i])
        if row[-1] < 0:
            row = [-v for v in row]
        ints = _scale_to_ints(row)
        art = [0] * m
        art[i] = 1
        rows.append(ints[:n] + art + [ints[n]])
    tab = _Tableau(rows, [n + i for i in range(m)], n)
    width = n + m + 1
    # phase 1: minimise the sum of artificials
    obj = [0] * width
    for row in rows:
        for j in range(n):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    tab.obj = obj
    tab.run(n)
    if tab.obj[-1] != 0:
        return StandardResult(LPStatus.INFEASIBLE)

    # drive artificials out of the basis, dropping dependent rows
    keep_rows = list(range(m))
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= n:
            row = tab.rows[i]
            s = next((j for j in range(n) if row[j] != 0), -1)
            if s >= 0:
                tab.pivot(i, s)
            else:
                del tab.rows[i]
                del tab.basis[i]
                del keep_rows[i]
                continue
        i += 1

    # phase 2
    cints = _scale_to_ints(list(c))
    det = tab.det
    obj = [cj * det for cj in cints] + [0] * m + [0]
    for row, b in zip(tab.rows, tab.basis):
        cb = cints[b]
        if cb:
            for j in range(width):
                obj[j] -= cb * row[j]
    for b in tab.basis:
        obj[b] = 0
    tab.obj = obj
    if not tab.run(n):
        return StandardResult(LPStatus.UNBOUNDED)

    y = [Fraction(0)] * n
    for row, b in zip(tab.rows, tab.basis):
        y[b] = Fraction(row[-1], tab.det)
    value = sum((Fraction(cj) * yj for cj, yj in zip(c, y) if yj), Fraction(0))
    return StandardResult(
        LPStatus.OPTIMAL, value, tuple(y), tuple(tab.basis), tuple(keep_rows)
    )


def solve_square(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve a nonsingular square system exactly by Gaussian elimination."""
    n = len(A)
    aug = [[Fraction(v) for v in A[i]] + [Fraction(b[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        aug[col], aug[piv] = aug[piv], aug[col]
        prow = aug[col]
        inv = 1 / prow[col]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] * inv
                aug[r] = [x - f * y for x, y in zip(aug[r], prow)]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def is_feasible(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> bool:
    """Decide whether ``{x | A x <= b}`` is nonempty (Farkas alternative)."""
    m = len(A)
    if m == 0:
        return True
    n = len(A[0]) if m else 0
    # infeasible  <=>  exists y >= 0, A^T y = 0, sum y = 1, b.y < 0
    M = [[A[i][j] for i in range(m)] for j in range(n)]
    M.append([Fraction(1)] * m)
    q = [Fraction(0)] * n + [Fraction(1)]
    res = solve_standard(M, q, b)
    if res.status is not LPStatus.OPTIMAL:
        return True
    return res.value >= 0


def maximize(
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
    c: Sequence[Fraction],
    known_feasible: bool = False,
    witness: bool = True,
) -> InequalityResult:
    """Maximise ``c.x`` over ``{x | A x <= b}`` with ``x`` free.

    Solved via the dual ``min b.y  s.t.  A^T y = c, y >= 0``; the primal
    witness is recovered from the optimal dual basis.  ``known_feasible``
    skips the extra feasibility test that separates an unbounded primal from
    an infeasible one; ``witness=False`` skips witness recovery.
    """
    n = len(c)
    m = len(A)
    if m == 0:
        if all(v == 0 for v in c):
            return InequalityResult(LPStatus.OPTIMAL, Fraction(0), tuple([Fraction(0)] * n))
        return InequalityResult(LPStatus.UNBOUNDED)
    M = [[A[i][j] for i in range(m)] for j in range(n)]
    res = solve_standard(M, c, b)
    if res.status is LPStatus.UNBOUNDED:
        return InequalityResult(LPStatus.INFEASIBLE)
    if res.status is LPStatus.INFEASIBLE:
        if known_feasible or is_feasible(A, b):
            return InequalityResult(LPStatus.UNBOUNDED)
        return InequalityResult(LPStatus.INFEASIBLE)
    x = _primal_from_basis(A, b, res, n) if witness else None
    return InequalityResult(LPStatus.OPTIMAL, res.value, x)


def _primal_from_basis(A, b, res: StandardResult, n: int) -> tuple[Fraction, ...]:
    # basic dual columns are constraints tight at the primal witness
    x = [Fraction(0)] * n
    rows = list(res.rows)
    if not rows:
        return tuple(x)
    sub = [[Fraction(A[k][j]) for j in rows] for k in res.basis]
    rhs = [Fraction(b[k]) for k in res.basis]
    sol = solve_square(sub, rhs)
    for j, v in zip(rows, sol):
        x[j] = v
    return tuple(x)

