"""Double description method on integer data.

Computes a minimal generating system (lineality basis + extreme rays) of the
polyhedral cone ``{z | h.z <= 0 for every row h}``.  Adjacency of rays is
decided combinatorially from their sets of tight constraints, kept as
integer bitmasks.
"""

from __future__ import annotations

from math import gcd


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def _primitive(v: list[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g > 1:
        return tuple(x // g for x in v)
    return tuple(v)


def cone_generators(rows: list[list[int]], n: int):
    """Return ``(lineality, rays)`` generating ``{z in Z^n | rows z <= 0}``."""
    lin: list[tuple[int, ...]] = [
        tuple(1 if i == j else 0 for j in range(n)) for i in range(n)
    ]
    rays: list[tuple[tuple[int, ...], int]] = []  # (vector, tight-set bitmask)
    processed = 0
    for k, h in enumerate(rows):
        if not any(h):
            continue
        bit = 1 << k
        vals = [_dot(h, l) for l in lin]
        idx = next((i for i, v in enumerate(vals) if v != 0), -1)
        if idx >= 0:
            l0 = lin[idx]
            v0 = vals[idx]
            if v0 > 0:
                l0 = tuple(-x for x in l0)
                v0 = -v0
            new_lin = []
            for i, (l, v) in enumerate(zip(lin, vals)):
                if i == idx:
                    continue
                if v == 0:
                    new_lin.append(l)
                else:
                    new_lin.append(_primitive([v0 * a - v * b for a, b in zip(l, l0)]))
            new_rays = []
            for r, z in rays:
                w = _dot(h, r)
                if w == 0:
                    new_rays.append((r, z | bit))
                else:
                    new_rays.append(
                        (_primitive([-v0 * a + w * b for a, b in zip(r, l0)]), z | bit)
                    )
            # l0 was in the lineality space, hence tight on everything so far
            new_rays.append((l0, processed))
            lin = new_lin
            rays = new_rays
            processed |= bit
            continue

        pos, zero, neg = [], [], []
        for r, z in rays:
            w = _dot(h, r)
            if w > 0:
                pos.append((r, z, w))
            elif w < 0:
                neg.append((r, z, w))
            else:
                zero.append((r, z | bit))
        new_rays = [(r, z) for r, z, _ in neg] + zero
        if pos and neg:
            need = n - len(lin) - 2
            all_masks = [z for _, z in rays]
            for rp, zp, wp in pos:
                for rn, zn, wn in neg:
                    common = zp & zn
                    if need > 0 and bin(common).count("1") < need:
                        continue
                    adjacent = True
                    for z in all_masks:
                        if z != zp and z != zn and common & ~z == 0:
                            adjacent = False
                            break
                    if not adjacent:
                        continue
                    vec = [wp * a - wn * b for a, b in zip(rn, rp)]
                    new_rays.append((_primitive(vec), common | bit))
        rays = new_rays
        processed |= bit
    return lin, [r for r, _ in rays]
