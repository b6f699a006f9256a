"""End-to-end forward analysis: unroll, explore, project, integrate."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .automaton import Rac, unroll
from .elimination import EliminationMode
from .integrate import IntegrationResult, VegasConfig, truncation_error, vegas_integrate
from .polytope import as_scalar, bounding_box
from .reach import ForwardRegion, GoalSpec, ReachTree, assemble_forward_region, build_reach_tree
from .stochastics import DEFAULT_TAU, BoundPair, tighten_bounds

__all__ = ["PipelineReport", "integration_bounds", "estimate_pipeline"]


@dataclass
class PipelineReport:
    result: IntegrationResult
    tree: ReachTree
    region: ForwardRegion
    bounds: list[BoundPair]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def goal_nodes(self) -> tuple[int, ...]:
        return self.region.node_indices

    @property
    def max_constraints(self) -> int:
        return self.tree.stats.max_intermediate_constraints


def _region_hull(region: ForwardRegion) -> list[tuple[float, float]]:
    """Per-dimension hull of the members' bounding boxes."""
    lo = [float("inf")] * region.dim
    hi = [float("-inf")] * region.dim
    for p in region.members:
        box = bounding_box(p)
        for i, (a, b) in enumerate(box.intervals):
            lo[i] = min(lo[i], float(a) if a is not None else float("-inf"))
            hi[i] = max(hi[i], float(b) if b is not None else float("inf"))
    return list(zip(lo, hi))


def integration_bounds(
    region: ForwardRegion,
    dists,
    t_int,
    adapt: bool = True,
    tau: float = DEFAULT_TAU,
) -> list[BoundPair]:
    """Per sample dimension window: tightened to the mass, clipped to the region."""
    t = float(t_int)
    if adapt:
        bounds = [tighten_bounds(d, t, tau) for d in dists]
    else:
        bounds = [BoundPair(0.0, t) for _ in dists]
    if region.members:
        bounds = [
            BoundPair(max(b.lo, lo), min(b.hi, hi)) for b, (lo, hi) in zip(bounds, _region_hull(region))
        ]
    return bounds


def estimate_pipeline(
    model: Rac,
    goal: GoalSpec,
    t_max,
    jmp: int,
    t_int=100,
    cfg: VegasConfig = VegasConfig(),
    mode: EliminationMode = EliminationMode.FM_PLUS,
    adapt_bounds: bool = True,
    init_location: str | None = None,
    tau: float = DEFAULT_TAU,
) -> PipelineReport:
    t_max = as_scalar(t_max)
    t_int = as_scalar(t_int)
    if t_int < t_max:
        raise ValueError("integration bound must be at least the time horizon")
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    u = unroll(model, jmp)
    tree = build_reach_tree(u, t_max, init_location, mode)
    t1 = time.perf_counter()
    region = assemble_forward_region(tree, goal, t_int, mode)
    t2 = time.perf_counter()
    dists = u.distributions
    bounds = integration_bounds(region, dists, t_int, adapt_bounds, tau)
    result = vegas_integrate(region, dists, bounds, cfg)
    e_inf = truncation_error(dists, region.lifted, float(t_int)) if region.members else 0.0
    t3 = time.perf_counter()
    timings.update(reach=t1 - t0, projection=t2 - t1, integration=t3 - t2, total=t3 - t0)
    result = replace(result, e_inf=e_inf)
    return PipelineReport(result, tree, region, bounds, timings)
