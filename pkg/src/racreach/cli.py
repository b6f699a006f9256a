"""Command-line front end: ``racreach analyze|bounds|tree|validate <model>``.

Exit codes: 0 success, 1 model error, 2 analysis error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .automaton import ModelError, unroll, validate
from .elimination import EliminationMode
from .integrate import VegasConfig
from .modelio import AnalysisConfig, ModelDocument, bundled_models, dump_tree, parse_model
from .pipeline import estimate_pipeline
from .polytope import as_scalar
from .reach import build_reach_tree, goal_nodes
from .stochastics import DegenerateBoundsError, tighten_bounds

__all__ = ["RunReport", "build_parser", "main", "EXIT_OK", "EXIT_MODEL", "EXIT_ANALYSIS"]

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_ANALYSIS = 2

log = logging.getLogger("racreach")


class _ModelRejected(Exception):
    """Validation found errors; already reported."""


@dataclass
class RunReport:
    p_max: float
    e_stat: float
    e_inf: float
    nodes: int
    goal_nodes: list[int]
    max_constraints: int
    eliminations: int
    timings: dict[str, float] = field(default_factory=dict)
    sampled_dims: list[str] = field(default_factory=list)
    factored_dims: list[str] = field(default_factory=list)
    bounds: list[list[float]] = field(default_factory=list)

    def to_json(self, with_timings: bool = True) -> dict:
        d = dict(self.__dict__)
        if not with_timings:
            d.pop("timings")
        return d


def _g(x: float) -> str:
    return f"{x:.6g}"


def _settings(doc: ModelDocument, args: argparse.Namespace) -> AnalysisConfig:
    a = doc.analysis
    kw = {}
    if args.tmax is not None:
        kw["t_max"] = as_scalar(args.tmax)
    if args.jumps is not None:
        kw["jmp"] = args.jumps
    if args.tint is not None:
        kw["t_int"] = as_scalar(args.tint)
    if getattr(args, "samples", None) is not None:
        kw["samples"] = args.samples
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if args.fm is not None:
        kw["fm_mode"] = EliminationMode.parse(args.fm)
    if args.no_adapt_bounds:
        kw["adapt_bounds"] = False
    return replace(a, **kw)


def _load(args: argparse.Namespace) -> tuple[ModelDocument, AnalysisConfig]:
    doc = parse_model(args.model)
    problems = validate(doc.rac)
    errors = [v for v in problems if v.severity == "error"]
    for v in problems:
        if v.severity != "error":
            print(str(v), file=sys.stderr)
    if errors:
        for v in errors:
            print(str(v), file=sys.stderr)
        raise _ModelRejected()
    try:
        cfg = _settings(doc, args)
    except ValueError as exc:
        raise ModelError(f"invalid analysis settings: {exc}") from None
    return doc, cfg


def _write_json(path: str | None, payload: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def cmd_analyze(args: argparse.Namespace) -> int:
    doc, a = _load(args)
    vcfg = VegasConfig(samples=a.samples, seed=a.seed, workers=args.workers)
    rep = estimate_pipeline(
        doc.rac,
        doc.goal,
        a.t_max,
        a.jmp,
        a.t_int,
        vcfg,
        a.fm_mode,
        a.adapt_bounds,
        a.init_location,
    )
    copies = rep.tree.layout.copies
    res = rep.result
    report = RunReport(
        p_max=res.p_max,
        e_stat=res.e_stat,
        e_inf=res.e_inf,
        nodes=len(rep.tree.nodes),
        goal_nodes=list(rep.goal_nodes),
        max_constraints=rep.max_constraints,
        eliminations=rep.tree.stats.eliminations_performed,
        timings=rep.timings,
        sampled_dims=[copies[i] for i in res.sampled_dims],
        factored_dims=[copies[i] for i in res.factored_dims],
        bounds=[[b.lo, b.hi] for b in rep.bounds],
    )
    name = doc.name or Path(args.model).stem
    print(f"model     {name}")
    print(f"settings  tmax={a.t_max} jumps={a.jmp} tint={a.t_int} samples={a.samples} "
          f"seed={a.seed} fm={a.fm_mode.value}")
    print(f"p_max     {_g(report.p_max)}")
    print(f"e_stat    {_g(report.e_stat)}")
    print(f"e_inf     {_g(report.e_inf)}")
    print(f"nodes     {report.nodes} (goal: {', '.join(map(str, report.goal_nodes)) or 'none'})")
    print(f"max N     {report.max_constraints}")
    print("time [s]  " + "  ".join(f"{k}={_g(v)}" for k, v in report.timings.items()))
    _write_json(args.json, report.to_json())
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    doc, a = _load(args)
    u = unroll(doc.rac, a.jmp)
    t = float(a.t_int)
    rows = []
    print(f"{'copy':<10} {'distribution':<32} {'unadapted':<22} adapted")
    for k, d in enumerate(u.distributions):
        if a.adapt_bounds:
            b = tighten_bounds(d, t)
            lo, hi = b.lo, b.hi
        else:
            lo, hi = 0.0, t
        name = u.copies[k].name
        rows.append({"copy": name, "distribution": d.describe(), "unadapted": [0.0, t], "adapted": [lo, hi]})
        print(f"{name:<10} {d.describe():<32} {'[0, ' + _g(t) + ']':<22} [{_g(lo)}, {_g(hi)}]")
    if not rows:
        print("(no clock copies: the jump bound leaves no stochastic event)")
    _write_json(args.json, {"t_int": t, "dimensions": rows})
    return EXIT_OK


def cmd_tree(args: argparse.Namespace) -> int:
    doc, a = _load(args)
    u = unroll(doc.rac, a.jmp)
    tree = build_reach_tree(u, a.t_max, a.init_location, a.fm_mode)
    goals = {i for i, _ in goal_nodes(tree, doc.goal)}
    payload = dump_tree(tree, goals)
    text = json.dumps(payload, indent=2)
    if args.json:
        _write_json(args.json, payload)
        print(f"{len(tree.nodes)} nodes, {len(tree.edges)} edges, goal nodes: {sorted(goals)}")
    else:
        print(text)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    doc = parse_model(args.model)
    problems = validate(doc.rac)
    for v in problems:
        print(str(v))
    errors = sum(v.severity == "error" for v in problems)
    warnings = len(problems) - errors
    print(f"{errors} error(s), {warnings} warning(s)")
    _write_json(args.json, {"violations": [v.__dict__ for v in problems]})
    return EXIT_MODEL if errors else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="racreach",
        description="Maximum reachability probabilities for rectangular automata with random clocks.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, sampling: bool) -> None:
        sp.add_argument("model", help=f"model JSON file or bundled name ({', '.join(sorted(bundled_models()))})")
        sp.add_argument("--tmax", help="time horizon (decimal or p/q)")
        sp.add_argument("--jumps", type=int, help="jump bound")
        sp.add_argument("--tint", help="integration bound, at least the time horizon")
        sp.add_argument("--fm", choices=["fm", "fm+"], help="elimination mode")
        sp.add_argument("--no-adapt-bounds", action="store_true", help="integrate over [0, tint]")
        sp.add_argument("--json", metavar="OUT", help="also write full-precision JSON here")
        if sampling:
            sp.add_argument("--samples", type=int, help="Monte Carlo sample budget")
            sp.add_argument("--seed", type=int, help="random seed")
            sp.add_argument("--workers", type=int, default=1, help="integration threads")

    for name, fn, sampling, help_ in (
        ("analyze", cmd_analyze, True, "run the full pipeline and report p_max"),
        ("bounds", cmd_bounds, False, "show integration windows per clock copy"),
        ("tree", cmd_tree, False, "dump the reach tree as JSON"),
    ):
        sp = sub.add_parser(name, help=help_)
        common(sp, sampling)
        sp.set_defaults(func=fn)
    sp = sub.add_parser("validate", help="check the model for structural violations")
    sp.add_argument("model")
    sp.add_argument("--json", metavar="OUT")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _ModelRejected:
        return EXIT_MODEL
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (ValueError, ArithmeticError, DegenerateBoundsError, RuntimeError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
