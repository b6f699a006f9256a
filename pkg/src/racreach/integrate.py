"""Adaptive Monte Carlo integration of the joint expiration density over a
union of polytopes, plus the truncation error of a finite integration box.

The sampler is classic Vegas: one piecewise-constant density per axis with
``bins`` intervals of equal probability, refined after every iteration.
Random numbers come from Philox streams keyed by ``(seed, iteration,
chunk)``, so splitting the work over threads never changes the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .polytope import HPolytope
from .reach import ForwardRegion
from .stochastics import BoundPair, DistributionSpec

__all__ = [
    "VegasConfig",
    "IntegrationResult",
    "vegas_integrate",
    "truncation_error",
]


@dataclass(frozen=True)
class VegasConfig:
    samples: int = 10**6
    iterations: int = 10
    bins: int = 50
    seed: int = 0
    alpha: float = 1.5
    warmup: int = 2
    workers: int = 1
    chunk_size: int = 2**16
    factor_free_dims: bool = True

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("need at least two bins per dimension")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.samples < self.iterations * self.bins:
            raise ValueError("samples must be at least iterations * bins")
        if not 0 <= self.warmup < self.iterations:
            raise ValueError("warm-up must leave at least one iteration")
        if self.workers < 1 or self.chunk_size < 1:
            raise ValueError("workers and chunk size must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class IterationEstimate:
    estimate: float
    error: float
    kept: bool


@dataclass(frozen=True)
class IntegrationResult:
    p_max: float
    e_stat: float
    e_inf: float
    hit_fraction: float
    iterations: tuple[IterationEstimate, ...] = ()
    sampled_dims: tuple[int, ...] = ()
    factored_dims: tuple[int, ...] = ()
    raw_estimate: float = 0.0  # before clipping into [0, 1]

    def as_dict(self) -> dict:
        return {
            "p_max": self.p_max,
            "e_stat": self.e_stat,
            "e_inf": self.e_inf,
            "hit_fraction": self.hit_fraction,
            "raw_estimate": self.raw_estimate,
            "sampled_dims": list(self.sampled_dims),
            "factored_dims": list(self.factored_dims),
            "iterations": [
                {"estimate": it.estimate, "error": it.error, "kept": it.kept}
                for it in self.iterations
            ],
        }


def truncation_error(
    dists: Sequence[DistributionSpec], lifted: Sequence[bool], t_int: float
) -> float:
    """Mass possibly lost by cutting lifted sample dimensions at ``t_int``."""
    if len(dists) != len(lifted):
        raise ValueError("one lifted flag per distribution expected")
    log_keep = 0.0
    for d, flag in zip(dists, lifted):
        if flag:
            tail = d.mass(float(t_int), math.inf)
            if tail >= 1.0:
                return 1.0
            log_keep += math.log1p(-tail)
    return max(0.0, -math.expm1(log_keep))


@dataclass
class _Member:
    A: np.ndarray
    b: np.ndarray


def _float_member(p: HPolytope, dims: Sequence[int]) -> _Member | None:
    """Float rows restricted to ``dims``; bounds rounded outward by one ulp."""
    rows, rhs = [], []
    dims_set = set(dims)
    for c in p.constraints:
        if any(a for i, a in enumerate(c.coeffs) if i not in dims_set):
            continue  # bound on a factored-out dimension, implied by the box
        coeffs = [float(c.coeffs[i]) for i in dims]
        if not any(coeffs):
            if c.bound < 0 or (c.strict and c.bound == 0):
                return None  # contradiction: contributes nothing
            continue
        rows.append(coeffs)
        rhs.append(np.nextafter(float(c.bound), math.inf))
    if not rows:
        return _Member(np.zeros((0, len(dims))), np.zeros(0))
    return _Member(np.array(rows, dtype=float), np.array(rhs, dtype=float))


def _free_dims(members: Sequence[HPolytope], box: Sequence[BoundPair]) -> list[int]:
    """Dimensions on which every member only has bounds looser than the box."""
    free = []
    for i, bp in enumerate(box):
        ok = True
        for p in members:
            for c in p.constraints:
                a = c.coeffs[i]
                if a == 0:
                    continue
                if any(c.coeffs[j] for j in range(len(c.coeffs)) if j != i):
                    ok = False
                    break
                limit = float(c.bound / a)
                if a > 0 and limit < bp.hi:
                    ok = False
                    break
                if a < 0 and limit > bp.lo:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            free.append(i)
    return free


class _Grid:
    def __init__(self, lo: np.ndarray, hi: np.ndarray, bins: int):
        self.bins = bins
        t = np.linspace(0.0, 1.0, bins + 1)
        self.edges = lo[:, None] + (hi - lo)[:, None] * t[None, :]

    def map(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unit-cube points to box points; returns points, jacobians, bin ids."""
        k = self.bins
        scaled = y * k
        idx = np.minimum(scaled.astype(np.int64), k - 1)
        frac = scaled - idx
        dims = np.arange(self.edges.shape[0])[None, :]
        left = self.edges[dims, idx]
        width = self.edges[dims, idx + 1] - left
        x = left + frac * width
        jac = np.prod(width * k, axis=1)
        return x, jac, idx

    def refine(self, weights: np.ndarray, alpha: float) -> None:
        """Move edges so every bin carries an equal share of the damped weight."""
        k = self.bins
        for d in range(self.edges.shape[0]):
            w = weights[d]
            total = w.sum()
            if not total > 0 or not np.isfinite(total):
                continue
            smooth = np.empty_like(w)
            smooth[0] = (3 * w[0] + w[1]) / 4
            smooth[-1] = (w[-2] + 3 * w[-1]) / 4
            smooth[1:-1] = (w[:-2] + 6 * w[1:-1] + w[2:]) / 8
            r = smooth / smooth.sum()
            with np.errstate(divide="ignore", invalid="ignore"):
                damp = np.where((r > 0) & (r < 1), ((r - 1) / np.log(r)) ** alpha, 0.0)
            damp = np.where(r >= 1, 1.0, damp)
            if not damp.sum() > 0:
                continue
            cum = np.concatenate([[0.0], np.cumsum(damp)])
            targets = np.linspace(0.0, cum[-1], k + 1)
            old = self.edges[d]
            new = np.interp(targets, cum, old)
            new[0], new[-1] = old[0], old[-1]
            self.edges[d] = new


def _chunk_sums(
    seed: int,
    iteration: int,
    chunk: int,
    size: int,
    grid: _Grid,
    members: Sequence[_Member],
    dists: Sequence[DistributionSpec],
) -> tuple[float, float, int, np.ndarray]:
    ss = np.random.SeedSequence([seed, iteration, chunk])
    rng = np.random.Generator(np.random.Philox(ss))
    dim = len(dists)
    y = rng.random((size, dim))
    x, jac, idx = grid.map(y)
    inside = np.zeros(size, dtype=bool)
    for m in members:
        if m.A.shape[0] == 0:
            inside[:] = True
            break
        inside |= np.all(x @ m.A.T <= m.b, axis=1)
    dens = np.ones(size)
    for i, d in enumerate(dists):
        dens *= d.pdf_array(x[:, i])
    w = np.where(inside, dens * jac, 0.0)
    w2 = w * w
    binw = np.zeros((dim, grid.bins))
    for i in range(dim):
        binw[i] = np.bincount(idx[:, i], weights=w2, minlength=grid.bins)
    return float(w.sum()), float(w2.sum()), int(inside.sum()), binw


def vegas_integrate(
    region: ForwardRegion | Sequence[HPolytope],
    dists: Sequence[DistributionSpec],
    box: Sequence[BoundPair],
    cfg: VegasConfig = VegasConfig(),
) -> IntegrationResult:
    """Estimate the probability mass of ``region`` under independent ``dists``.

    ``box`` gives the per-dimension integration window; mass outside it is
    ignored (see :func:`truncation_error` for the cost of that).
    """
    members = list(region.members if isinstance(region, ForwardRegion) else region)
    dim = len(dists)
    if len(box) != dim:
        raise ValueError("one bound pair per distribution expected")
    for p in members:
        if p.dim != dim:
            raise ValueError(f"region member of dimension {p.dim}, expected {dim}")
    if not members or any(bp.hi <= bp.lo for bp in box):
        return IntegrationResult(0.0, 0.0, 0.0, 0.0)

    free = _free_dims(members, box) if cfg.factor_free_dims else []
    factor = 1.0
    for i in free:
        factor *= dists[i].mass(box[i].lo, box[i].hi)
    sampled = [i for i in range(dim) if i not in set(free)]
    fmembers = [fm for fm in (_float_member(p, sampled) for p in members) if fm is not None]
    if not fmembers:
        return IntegrationResult(0.0, 0.0, 0.0, 0.0, (), tuple(sampled), tuple(free))
    if not sampled:
        p = min(max(factor, 0.0), 1.0)
        return IntegrationResult(p, 0.0, 0.0, 1.0, (), (), tuple(free), factor)

    sdists = [dists[i] for i in sampled]
    lo = np.array([box[i].lo for i in sampled], dtype=float)
    hi = np.array([box[i].hi for i in sampled], dtype=float)
    grid = _Grid(lo, hi, cfg.bins)

    per_iter = cfg.samples // cfg.iterations
    chunks = [
        (c, min(cfg.chunk_size, per_iter - c * cfg.chunk_size))
        for c in range(-(-per_iter // cfg.chunk_size))
    ]
    estimates: list[IterationEstimate] = []
    hits = 0
    total = 0
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for it in range(cfg.iterations):
            def run(job, it=it):
                c, size = job
                return _chunk_sums(cfg.seed, it, c, size, grid, fmembers, sdists)

            parts = list(pool.map(run, chunks)) if pool else [run(j) for j in chunks]
            s1 = s2 = 0.0
            binw = np.zeros((len(sampled), cfg.bins))
            for a, b, h, bw in parts:  # fixed order keeps sums reproducible
                s1 += a
                s2 += b
                hits += h
                binw += bw
            total += per_iter
            mean = s1 / per_iter
            var = max(s2 / per_iter - mean * mean, 0.0) / max(per_iter - 1, 1)
            estimates.append(IterationEstimate(mean, math.sqrt(var), it >= cfg.warmup))
            if it + 1 < cfg.iterations:
                grid.refine(binw, cfg.alpha)
    finally:
        if pool is not None:
            pool.shutdown()

    kept = [e for e in estimates if e.kept]
    exact = [e for e in kept if e.error == 0.0]
    if exact:
        value = sum(e.estimate for e in exact) / len(exact)
        err = 0.0
    else:
        wsum = sum(1.0 / e.error**2 for e in kept)
        value = sum(e.estimate / e.error**2 for e in kept) / wsum
        err = math.sqrt(1.0 / wsum)
    raw = value * factor
    return IntegrationResult(
        p_max=min(max(raw, 0.0), 1.0),
        e_stat=err * factor,
        e_inf=0.0,
        hit_fraction=hits / total if total else 0.0,
        iterations=tuple(estimates),
        sampled_dims=tuple(sampled),
        factored_dims=tuple(free),
        raw_estimate=raw,
    )
