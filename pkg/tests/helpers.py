"""Fixtures shared by the unit and acceptance tests."""

from __future__ import annotations

import random
from fractions import Fraction

from racreach.polytope import HPolytope, VPolytope, is_empty, to_hrep, to_vrep


def random_bounded_polytope(rng: random.Random, dim: int | None = None, max_rows: int = 12) -> HPolytope:
    """A box (so the result is bounded) plus random extra cuts, at most ``max_rows`` rows."""
    d = dim if dim is not None else rng.randint(2, 5)
    rows, rhs = [], []
    for i in range(d):
        for sign in (1, -1):
            e = [0] * d
            e[i] = sign
            rows.append(e)
            rhs.append(rng.randint(1, 5))
    for _ in range(rng.randint(0, max_rows - 2 * d)):
        rows.append([rng.randint(-3, 3) for _ in range(d)])
        rhs.append(rng.randint(-1, 6))
    return HPolytope.from_rows(rows, rhs)


def brute_force_projection(p: HPolytope, keep: list[int]) -> HPolytope:
    """Hull of the projected vertices: the reference answer for elimination."""
    v = to_vrep(p)
    pts = tuple(dict.fromkeys(tuple(x[i] for i in keep) for x in v.vertices))
    return to_hrep(VPolytope(len(keep), pts))


def cyclic_chain(m: int = 4, slopes=(1, 2), extra: int = 2) -> HPolytope:
    """Chained two-sided bounds x_i ~ x_{i+1} (cyclic) coupled to ``extra`` kept variables.

    Eliminating the chain variables makes plain Fourier-Motzkin produce
    many redundant rows.
    """
    n = m + extra
    rows, rhs = [], []
    for i in range(m):
        j = (i + 1) % m
        for s1, s2 in ((1, -1), (-1, 1), (1, 1), (-1, -1)):
            for k, c in enumerate(slopes):
                r = [0] * n
                r[i] = s1 * c
                r[j] = s2
                r[m + (i + k) % extra] = 1 if (i + k) % 2 else -1
                rows.append(r)
                rhs.append(6 + k + i)
    for y in range(extra):
        for sign in (1, -1):
            r = [0] * n
            r[m + y] = sign
            rows.append(r)
            rhs.append(5)
    return HPolytope.from_rows(rows, rhs)


def frac_box(p: HPolytope, dims) -> list[tuple[Fraction | None, Fraction | None]]:
    from racreach.polytope import bounding_box

    box = bounding_box(p)
    return [box.intervals[i] for i in dims]


__all__ = ["random_bounded_polytope", "brute_force_projection", "cyclic_chain", "frac_box", "is_empty"]

# filled by the acceptance suite, printed in the pytest terminal summary
ACCEPTANCE_LINES: list[str] = []
