"""JSON model documents and reach-tree dumps.

A model document looks like::

    {
      "variables": ["x"],
      "clocks": [{"name": "r", "distribution": {"type": "exp", "lambda": 1}}],
      "locations": [
        {"name": "A", "invariant": {"x": [0, "inf"]}, "flow": {"x": [1, 1]},
         "init": {"x": [0, 0]}},
        {"name": "B", "flow": {"x": [0, 0]}}
      ],
      "jumps": [{"from": "A", "to": "B", "event": "r"}],
      "goal": {"locations": ["B"],
               "constraints": [{"coeffs": {"x": 1}, "op": "<=", "bound": 4}]},
      "analysis": {"tmax": 1, "jumps": 1, "tint": 100}
    }

Numbers may be JSON numbers, decimal strings or ``"p/q"`` strings; interval
ends may be ``"inf"`` / ``"-inf"``.  Variables missing from an invariant,
guard or init rectangle are unconstrained, missing flows default to
``[0, 0]`` and missing resets keep the value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .automaton import Interval, Jump, Location, ModelError, Rac
from .elimination import EliminationMode
from .polytope import HPolytope, LinearConstraint, as_scalar
from .reach import GoalSpec, ReachTree
from .stochastics import DistributionSpec, Exponential, FoldedNormal, Uniform

__all__ = [
    "ModelParseError",
    "AnalysisConfig",
    "ModelDocument",
    "parse_model",
    "load_model",
    "parse_model_text",
    "bundled_models",
    "resolve_model_path",
    "dump_tree",
    "polytope_to_json",
    "polytope_from_json",
    "scalar_to_json",
]


class ModelParseError(ModelError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    t_max: Fraction = Fraction(1)
    jmp: int = 1
    t_int: Fraction = Fraction(100)
    samples: int = 10**6
    seed: int = 0
    fm_mode: EliminationMode = EliminationMode.FM_PLUS
    adapt_bounds: bool = True
    init_location: str | None = None

    def __post_init__(self):
        if self.t_max < 0:
            raise ValueError("time horizon must be nonnegative")
        if self.jmp < 0:
            raise ValueError("jump bound must be nonnegative")
        if self.t_int < self.t_max or self.t_int <= 0:
            raise ValueError("integration bound must be positive and at least the time horizon")
        if self.samples < 1000:
            raise ValueError("at least 1000 samples are required")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class ModelDocument:
    rac: Rac
    goal: GoalSpec
    analysis: AnalysisConfig
    name: str = ""
    description: str = ""
    source: str | None = None
    extra: dict = field(default_factory=dict)


_TOP_KEYS = {"name", "description", "variables", "clocks", "locations", "jumps", "goal", "analysis"}


def _fail(where: str, msg: str):
    raise ModelParseError(f"{where}: {msg}")


def _keys(obj: Any, where: str, allowed: set[str], required: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        _fail(where, f"expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        _fail(where, f"unknown key(s) {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        _fail(where, f"missing field(s) {sorted(missing)}")
    return obj


def _number(v: Any, where: str) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        _fail(where, f"expected a number, got {v!r}")
    try:
        return as_scalar(v)
    except (ValueError, ZeroDivisionError, TypeError):
        _fail(where, f"not a number: {v!r}")


def _end(v: Any, where: str, side: str) -> Fraction | None:
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "-inf"):
        neg = v.strip().startswith("-")
        if side == "lo" and not neg or side == "hi" and neg:
            _fail(where, f"infinite end {v!r} on the wrong side")
        return None
    return _number(v, where)


def _interval(v: Any, where: str) -> Interval:
    if not isinstance(v, list) or len(v) != 2:
        _fail(where, "an interval is a two-element list [lo, hi]")
    return Interval(_end(v[0], f"{where}[0]", "lo"), _end(v[1], f"{where}[1]", "hi"))


def _rect(obj: Any, where: str, variables: tuple[str, ...], default: Interval) -> tuple[Interval, ...]:
    if obj is None:
        return tuple(default for _ in variables)
    _keys(obj, where, set(variables))
    return tuple(
        _interval(obj[x], f"{where}.{x}") if x in obj else default for x in variables
    )


def _distribution(obj: Any, where: str) -> DistributionSpec:
    _keys(obj, where, {"type", "lambda", "rate", "mu", "sigma", "a", "b"}, {"type"})
    kind = obj["type"]
    try:
        if kind in ("exp", "exponential"):
            _keys(obj, where, {"type", "lambda", "rate"})
            key = "lambda" if "lambda" in obj else "rate" if "rate" in obj else None
            if key is None:
                _fail(where, "missing field 'lambda'")
            return Exponential(float(_number(obj[key], f"{where}.{key}")))
        if kind in ("folded_normal", "foldednormal"):
            _keys(obj, where, {"type", "mu", "sigma"}, {"mu", "sigma"})
            return FoldedNormal(
                float(_number(obj["mu"], f"{where}.mu")), float(_number(obj["sigma"], f"{where}.sigma"))
            )
        if kind == "uniform":
            _keys(obj, where, {"type", "a", "b"}, {"a", "b"})
            return Uniform(float(_number(obj["a"], f"{where}.a")), float(_number(obj["b"], f"{where}.b")))
    except ModelParseError:
        raise
    except ValueError as exc:
        _fail(where, str(exc))
    _fail(where, f"unknown distribution type {kind!r}")


_OPS = {"<=": (1, False), "<": (1, True), ">=": (-1, False), ">": (-1, True)}


def _goal(obj: Any, variables: tuple[str, ...]) -> GoalSpec:
    _keys(obj, "goal", {"locations", "constraints"}, {"locations"})
    locs = obj["locations"]
    if not isinstance(locs, list) or not all(isinstance(l, str) for l in locs):
        _fail("goal.locations", "expected a list of location names")
    rows = []
    for k, c in enumerate(obj.get("constraints", [])):
        where = f"goal.constraints[{k}]"
        _keys(c, where, {"coeffs", "op", "bound"}, {"coeffs", "op", "bound"})
        _keys(c["coeffs"], f"{where}.coeffs", set(variables))
        coeffs = [_number(c["coeffs"].get(x, 0), f"{where}.coeffs.{x}") for x in variables]
        bound = _number(c["bound"], f"{where}.bound")
        op = c["op"]
        if op in ("=", "=="):
            rows.append(LinearConstraint(tuple(coeffs), bound))
            rows.append(LinearConstraint(tuple(-a for a in coeffs), -bound))
            continue
        if op not in _OPS:
            _fail(f"{where}.op", f"unknown operator {op!r}")
        sign, strict = _OPS[op]
        rows.append(LinearConstraint(tuple(sign * a for a in coeffs), sign * bound, strict))
    valuation = HPolytope(len(variables), rows) if rows else None
    return GoalSpec(frozenset(locs), valuation)


def _analysis(obj: Any) -> AnalysisConfig:
    if obj is None:
        return AnalysisConfig()
    _keys(obj, "analysis", {"tmax", "jumps", "tint", "samples", "seed", "fm", "adapt_bounds", "init"})
    kw: dict[str, Any] = {}
    if "tmax" in obj:
        kw["t_max"] = _number(obj["tmax"], "analysis.tmax")
    if "tint" in obj:
        kw["t_int"] = _number(obj["tint"], "analysis.tint")
    for key, name in (("jumps", "jmp"), ("samples", "samples"), ("seed", "seed")):
        if key in obj:
            v = obj[key]
            if isinstance(v, bool) or not isinstance(v, int):
                _fail(f"analysis.{key}", "expected an integer")
            kw[name] = v
    if "fm" in obj:
        try:
            kw["fm_mode"] = EliminationMode.parse(obj["fm"])
        except ValueError as exc:
            _fail("analysis.fm", str(exc))
    if "adapt_bounds" in obj:
        kw["adapt_bounds"] = bool(obj["adapt_bounds"])
    if "init" in obj:
        kw["init_location"] = str(obj["init"])
    try:
        return AnalysisConfig(**kw)
    except ValueError as exc:
        _fail("analysis", str(exc))


def _from_obj(doc: Any, source: str | None) -> ModelDocument:
    _keys(doc, "model", _TOP_KEYS, {"variables", "locations", "goal"})
    variables = doc["variables"]
    if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
        _fail("variables", "expected a list of names")
    variables = tuple(variables)

    clocks, dists = [], {}
    for k, c in enumerate(doc.get("clocks", [])):
        where = f"clocks[{k}]"
        _keys(c, where, {"name", "distribution"}, {"name", "distribution"})
        clocks.append(c["name"])
        dists[c["name"]] = _distribution(c["distribution"], f"{where}.distribution")

    locations = []
    for k, l in enumerate(doc["locations"]):
        where = f"locations[{k}]"
        _keys(l, where, {"name", "invariant", "flow", "init"}, {"name"})
        init = _rect(l["init"], f"{where}.init", variables, Interval()) if "init" in l else None
        locations.append(
            Location(
                l["name"],
                _rect(l.get("invariant"), f"{where}.invariant", variables, Interval()),
                _rect(l.get("flow"), f"{where}.flow", variables, Interval.point(0)),
                init,
            )
        )

    jumps = []
    for k, j in enumerate(doc.get("jumps", [])):
        where = f"jumps[{k}]"
        _keys(j, where, {"from", "to", "guard", "reset", "event"}, {"from", "to"})
        reset_obj = j.get("reset") or {}
        _keys(reset_obj, f"{where}.reset", set(variables))
        reset = []
        for x in variables:
            r = reset_obj.get(x, "id")
            reset.append(None if r == "id" else _interval(r, f"{where}.reset.{x}"))
        event = j.get("event")
        if event is not None and not isinstance(event, str):
            _fail(f"{where}.event", "expected a clock name")
        jumps.append(
            Jump(j["from"], j["to"], _rect(j.get("guard"), f"{where}.guard", variables, Interval()), tuple(reset), event)
        )

    rac = Rac(variables, tuple(locations), tuple(jumps), tuple(clocks), dists)
    goal = _goal(doc["goal"], variables)
    return ModelDocument(
        rac,
        goal,
        _analysis(doc.get("analysis")),
        str(doc.get("name", "")),
        str(doc.get("description", "")),
        source,
    )


def parse_model_text(text: str, source: str | None = None) -> ModelDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        where = source or "<model>"
        raise ModelParseError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return _from_obj(doc, source)


def bundled_models() -> dict[str, str]:
    """Bundled model names mapped to their file paths."""
    root = resources.files("racreach") / "models"
    return {p.name[:-5]: str(p) for p in root.iterdir() if p.name.endswith(".json")}


def resolve_model_path(name_or_path: str) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = bundled_models()
    key = name_or_path[:-5] if name_or_path.endswith(".json") else name_or_path
    if key in bundled:
        return Path(bundled[key])
    raise ModelParseError(f"no such model file or bundled model: {name_or_path}")


def parse_model(path: str | Path) -> ModelDocument:
    p = resolve_model_path(str(path))
    return parse_model_text(p.read_text(encoding="utf-8"), str(p))


load_model = parse_model


def scalar_to_json(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def polytope_to_json(p: HPolytope) -> list[dict]:
    return [
        {
            "coeffs": [scalar_to_json(a) for a in c.coeffs],
            "bound": scalar_to_json(c.bound),
            "strict": c.strict,
        }
        for c in p.constraints
    ]


def polytope_from_json(rows: list[dict], dim: int) -> HPolytope:
    cons = []
    for r in rows:
        coeffs = tuple(as_scalar(a) for a in r["coeffs"])
        if len(coeffs) != dim:
            raise ModelParseError("constraint arity does not match the dimension")
        cons.append(LinearConstraint(coeffs, as_scalar(r["bound"]), bool(r.get("strict", False))))
    return HPolytope(dim, cons)


def dump_tree(tree: ReachTree, goal_indices: set[int] | frozenset[int] = frozenset()) -> dict:
    u = tree.unrolled
    return {
        "dimensions": list(tree.layout.variables) + list(tree.layout.copies),
        "tmax": scalar_to_json(tree.t_max),
        "jumps": tree.jmp,
        "nodes": [
            {
                "index": n.index,
                "depth": n.depth,
                "location": u.origin[n.state.location],
                "path": list(u.path[n.state.location]),
                "parent": n.parent,
                "expired": sorted(tree.layout.copies[k] for k in n.expired),
                "goal": n.index in goal_indices,
                "constraints": polytope_to_json(n.state.polytope),
            }
            for n in tree.nodes
        ],
        "edges": [
            {"parent": p, "child": c, "jump": _edge_label(tree, k)}
            for p, k, c in tree.edges
        ],
    }


def _edge_label(tree: ReachTree, k: int) -> str:
    u = tree.unrolled
    j = u.original.jumps[u.jump_origin[k]]
    ev = u.rac.jumps[k].event
    return f"{j.source}->{j.target}" + (f" [{ev}]" if ev else "")
