"""Expiration-time distributions for random clocks.

Three families are supported, all with support in the nonnegative reals:
folded normal, exponential and uniform.  Besides densities and interval
masses this module tightens the per-dimension integration window
``[0, t_int]`` to the part that actually carries probability mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "FoldedNormal",
    "Exponential",
    "Uniform",
    "DistributionSpec",
    "BoundPair",
    "DegenerateBoundsError",
    "DEFAULT_TAU",
    "pdf",
    "interval_mass",
    "tighten_bounds",
    "joint_density",
    "describe",
]

# IEEE double unit roundoff
DEFAULT_TAU = 2.0**-54

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


class DegenerateBoundsError(ValueError):
    """Tightening produced an empty window (no mass inside ``[0, t_int]``)."""


def _phi(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def _gauss_legendre(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return float(half * np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def _normal_mass(z1: float, z2: float) -> float:
    """Standard normal mass of ``[z1, z2]`` without catastrophic cancellation."""
    if z2 <= z1:
        return 0.0
    if z1 >= 0.0:
        a = 0.5 * math.erfc(z1 / _SQRT2)
        if a == 0.0 or not math.isfinite(z2):
            return a
        b = 0.5 * math.erfc(z2 / _SQRT2)
        if b < 0.5 * a:
            return a - b
        # narrow window: the density varies by less than a factor two
        return _gauss_legendre(lambda z: _INV_SQRT_2PI * np.exp(-0.5 * z * z), z1, z2)
    if z2 <= 0.0:
        return _normal_mass(-z2, -z1)
    return 0.5 * (math.erf(z2 / _SQRT2) - math.erf(z1 / _SQRT2))


@dataclass(frozen=True)
class FoldedNormal:
    """Distribution of ``|X|`` for ``X ~ N(mu, sigma^2)``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.mu >= 0 and self.sigma > 0 and math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError(f"folded normal needs mu >= 0 and sigma > 0, got {self.mu}, {self.sigma}")

    def pdf(self, x: float) -> float:
        if x < 0:
            return 0.0
        return (_phi((x - self.mu) / self.sigma) + _phi((x + self.mu) / self.sigma)) / self.sigma

    def pdf_array(self, x: np.ndarray) -> np.ndarray:
        z1 = (x - self.mu) / self.sigma
        z2 = (x + self.mu) / self.sigma
        out = (np.exp(-0.5 * z1 * z1) + np.exp(-0.5 * z2 * z2)) * (_INV_SQRT_2PI / self.sigma)
        return np.where(x >= 0, out, 0.0)

    def mass(self, lo: float, hi: float) -> float:
        lo = max(lo, 0.0)
        if hi <= lo:
            return 0.0
        s = self.sigma
        # |X| in [lo, hi]  <=>  X in [lo, hi] or X in [-hi, -lo]
        return _normal_mass((lo - self.mu) / s, (hi - self.mu) / s) + _normal_mass(
            (-hi - self.mu) / s, (-lo - self.mu) / s
        )

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.abs(rng.normal(self.mu, self.sigma, size))

    def describe(self) -> str:
        return f"FoldedNormal(mu={self.mu:g}, sigma={self.sigma:g})"


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"exponential rate must be positive, got {self.rate}")

    def pdf(self, x: float) -> float:
        if x < 0:
            return 0.0
        return self.rate * math.exp(-self.rate * x)

    def pdf_array(self, x: np.ndarray) -> np.ndarray:
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def mass(self, lo: float, hi: float) -> float:
        lo = max(lo, 0.0)
        if hi <= lo:
            return 0.0
        head = math.exp(-self.rate * lo)
        if math.isinf(hi):
            return head
        return head * -math.expm1(-self.rate * (hi - lo))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.exponential(1.0 / self.rate, size)

    def describe(self) -> str:
        return f"Exp(lambda={self.rate:g})"


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not (0 <= self.a < self.b and math.isfinite(self.b)):
            raise ValueError(f"uniform needs 0 <= a < b, got [{self.a}, {self.b}]")

    def pdf(self, x: float) -> float:
        return 1.0 / (self.b - self.a) if self.a <= x <= self.b else 0.0

    def pdf_array(self, x: np.ndarray) -> np.ndarray:
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def mass(self, lo: float, hi: float) -> float:
        lo = max(lo, self.a)
        hi = min(hi, self.b)
        if hi <= lo:
            return 0.0
        return (hi - lo) / (self.b - self.a)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.uniform(self.a, self.b, size)

    def describe(self) -> str:
        return f"Uniform(a={self.a:g}, b={self.b:g})"


DistributionSpec = Union[FoldedNormal, Exponential, Uniform]


@dataclass(frozen=True)
class BoundPair:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


def pdf(d: DistributionSpec, x: float) -> float:
    return d.pdf(x)


def interval_mass(d: DistributionSpec, lo: float, hi: float) -> float:
    return d.mass(lo, hi)


def describe(d: DistributionSpec) -> str:
    return d.describe()


def joint_density(dists: Sequence[DistributionSpec], s: Sequence[float]) -> float:
    if len(dists) != len(s):
        raise ValueError("one coordinate per distribution expected")
    out = 1.0
    for d, x in zip(dists, s):
        out *= d.pdf(x)
    return out


_SEARCH_WIDTH = 1e-9
_SEARCH_ITERS = 200


def _bisect(ok: Callable[[float], bool], good: float, bad: float) -> float:
    """Move from ``good`` toward ``bad`` while ``ok`` holds; returns a point where it holds."""
    for _ in range(_SEARCH_ITERS):
        if abs(bad - good) <= _SEARCH_WIDTH:
            break
        mid = 0.5 * (good + bad)
        if ok(mid):
            good = mid
        else:
            bad = mid
    return good


def _find_larger(d: DistributionSpec, lo: float, ceiling: float, tau: float) -> float:
    """Largest lower bound in ``[lo, ceiling]`` discarding at most ``tau`` on the left."""
    if ceiling <= lo:
        return lo
    ok = lambda x: d.mass(0.0, x) <= tau
    if ok(ceiling):
        return ceiling
    return _bisect(ok, lo, ceiling)


def _find_smaller(d: DistributionSpec, hi: float, floor: float, t_int: float, tau: float) -> float:
    """Smallest upper bound in ``[floor, hi]`` discarding at most ``tau`` below ``t_int``."""
    if floor >= hi:
        return hi
    ok = lambda x: d.mass(x, t_int) <= tau
    if ok(floor):
        return floor
    return _bisect(ok, hi, floor)


def tighten_bounds(d: DistributionSpec, t_int: float, tau: float = DEFAULT_TAU) -> BoundPair:
    """Shrink ``[0, t_int]`` for one dimension without losing more than ``tau`` per side."""
    t_int = float(t_int)
    if not 0 < tau < 1:
        raise ValueError(f"tail threshold must lie in (0, 1), got {tau}")
    if t_int <= 0:
        raise ValueError("integration bound must be positive")

    if isinstance(d, FoldedNormal):
        mu = d.mu
        if 2 * mu - t_int < 0:
            lo, hi = 0.0, 2 * mu
            if d.mass(hi, t_int) > tau:
                hi = _find_smaller(d, t_int, hi, t_int, tau)
        else:
            lo, hi = 2 * mu - t_int, t_int
            if d.mass(0.0, lo) > tau:
                lo = _find_larger(d, 0.0, lo, tau)
        lo = _find_larger(d, lo, min(mu, hi), tau)
        hi = _find_smaller(d, hi, max(mu, lo), t_int, tau)
    elif isinstance(d, Exponential):
        hi = min(t_int, -math.log(tau) / d.rate)
        lo = _find_larger(d, 0.0, min(1.0 / d.rate, hi), tau)
    elif isinstance(d, Uniform):
        lo, hi = max(0.0, d.a), min(d.b, t_int)
        if lo < hi:
            lo = _find_larger(d, lo, hi, tau)
            hi = _find_smaller(d, hi, lo, t_int, tau)
    else:
        raise TypeError(f"unsupported distribution {d!r}")

    if not lo < hi:
        raise DegenerateBoundsError(
            f"{d.describe()} has no usable mass inside [0, {t_int:g}] (got [{lo:g}, {hi:g}])"
        )
    return BoundPair(lo, hi)
