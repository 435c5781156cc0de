"""Command-line interface: parse | beta | grade | generate | vary | simulate | serve.

Exit codes: 0 success, 1 validation failure, 2 internal error, 64 usage error.
Every subcommand can emit machine-readable output with --json; grade/beta
results are bit-identical to the HTTP service for the same inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .climber import (
    PopulationSpec,
    sample_population,
    simulate_ascent,
    derive_rng,
    route_success_probability,
)
from .corpus import CorpusStore, CorpusError
from .format import parse_document, serialize_document, to_json_object
from .generator import GenerationConfig, GenerationError, generate_route
from .grading import GradingError, assign_grade
from .model import GradeLabel, GradeError, Route, Wall, validate_route
from .params import DEFAULT_PARAMS, EngineParams
from .planner import PlannerError, UnreachableError, plan_beta
from .service import DEFAULT_PORT, DEFAULT_POPULATION, beta_to_json, climber_from_json, create_app
from .style import StyleVector, vary_route

EX_OK = 0
EX_VALIDATION = 1
EX_INTERNAL = 2
EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _load_document(path: str) -> tuple[Wall, tuple[Route, ...]]:
    text = Path(path).read_text(encoding="utf-8", errors="replace")
    result = parse_document(text)
    if not result.ok:
        for e in result.errors:
            print(f"{path}:{e.location.line}:{e.location.column}: {e.code}: {e.message}",
                  file=sys.stderr)
        raise SystemExit(EX_VALIDATION)
    return result.wall, result.routes


def _pick_route(routes: tuple[Route, ...], name: Optional[str], path: str) -> Route:
    if not routes:
        print(f"{path}: no routes in document", file=sys.stderr)
        raise SystemExit(EX_VALIDATION)
    if name is None:
        return routes[0]
    for r in routes:
        if r.name == name:
            return r
    print(f"{path}: no route named {name}", file=sys.stderr)
    raise SystemExit(EX_VALIDATION)


def _engine_params(args) -> EngineParams:
    if getattr(args, "config", None):
        return EngineParams.from_file(args.config)
    return DEFAULT_PARAMS


def _population(args, fallback_seed: int):
    spec = DEFAULT_POPULATION
    if getattr(args, "population", None):
        spec = PopulationSpec.from_json(json.loads(Path(args.population).read_text()))
    seed = spec.seed if spec.seed is not None else fallback_seed
    return sample_population(spec, seed)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_parse(args) -> int:
    wall, routes = _load_document(args.file)
    issues = []
    for r in routes:
        report = validate_route(r, wall)
        issues.extend((r.name, i) for i in report.issues)
    if issues:
        for name, i in issues:
            print(f"{args.file}: route {name}: {i.code}: {i.message}", file=sys.stderr)
        return EX_VALIDATION
    if args.json:
        print(json.dumps(to_json_object(wall, routes), indent=2, sort_keys=True))
    else:
        sys.stdout.write(serialize_document(wall, routes))
    return EX_OK


def cmd_beta(args) -> int:
    wall, routes = _load_document(args.file)
    route = _pick_route(routes, args.route, args.file)
    params = _engine_params(args)
    climber = climber_from_json(
        json.loads(Path(args.climber).read_text()) if args.climber else None)
    try:
        beta = plan_beta(route, wall, climber, params=params)
    except UnreachableError:
        print(f"{route.name}: UNREACHABLE", file=sys.stderr)
        return EX_VALIDATION
    except PlannerError as e:
        print(f"{route.name}: {e.code}: {e}", file=sys.stderr)
        return EX_VALIDATION
    payload = {"beta": beta_to_json(beta),
               "success_probability": beta.success_probability()}
    lines = [f"route {route.name}: {len(beta.moves)} moves, "
             f"cost {beta.total_cost:.4f}, p={beta.success_probability():.4f}"]
    for m in beta.moves:
        lines.append(f"  {m.limb} {m.from_hold} -> {m.to_hold} "
                     f"({m.move_type.value}, {m.distance:.2f} m, p={m.success_probability:.3f})")
    _emit(args, payload, "\n".join(lines))
    return EX_OK


def cmd_grade(args) -> int:
    wall, routes = _load_document(args.file)
    route = _pick_route(routes, args.route, args.file)
    params = _engine_params(args)
    if args.threshold is not None:
        params = params.with_overrides(threshold=args.threshold)
    store = CorpusStore(args.corpus)
    try:
        corpus = store.grade_sets()
        assignment = assign_grade(route, wall, corpus, _population(args, args.seed),
                                  tnorm_kind=args.tnorm, seed=args.seed, params=params)
    except GradingError as e:
        print(f"{route.name}: {e.code}: {e}", file=sys.stderr)
        return EX_VALIDATION
    except (CorpusError, PlannerError) as e:
        print(f"{route.name}: {e}", file=sys.stderr)
        return EX_VALIDATION
    lines = [f"route {route.name}: {assignment.grade}"]
    for s in assignment.scores:
        flags = f" [{','.join(s.flags)}]" if s.flags else ""
        lines.append(f"  {s.label}: P(R|S)={s.p_route_given_set:.4f} "
                     f"P(S|R)={s.p_set_given_route:.4f} conj={s.conjunction:.4f}{flags}")
    _emit(args, assignment.to_json(), "\n".join(lines))
    return EX_OK


def cmd_generate(args) -> int:
    wall, routes = _load_document(args.wall)
    params = _engine_params(args)
    style = None
    if args.target_style:
        style = StyleVector.from_json(json.loads(Path(args.target_style).read_text()))
    try:
        target = GradeLabel.parse(args.target_grade)
    except GradeError as e:
        print(f"bad grade: {e}", file=sys.stderr)
        return EX_USAGE
    config = GenerationConfig(
        target_grade=target, target_style=style,
        max_iterations=args.iterations, seed=args.seed,
        hold_budget=args.hold_budget,
        in_loop_population=args.in_loop_population,
    )
    store = CorpusStore(args.corpus)
    seed_route = _pick_route(routes, args.route, args.wall) if routes and args.route else None
    try:
        corpus = store.grade_sets()
        if not corpus:
            print(f"{args.corpus}: no graded corpus routes", file=sys.stderr)
            return EX_VALIDATION
        result = generate_route(wall, seed_route, config, corpus,
                                _population(args, args.seed), params=params)
    except (GenerationError, GradingError, CorpusError) as e:
        print(f"generate: {e}", file=sys.stderr)
        return EX_VALIDATION
    doc = serialize_document(result.wall, (result.route,))
    report_json = result.report.to_json()
    if args.out:
        out = Path(args.out)
        out.write_text(doc, encoding="utf-8")
        report_path = out.with_suffix(".report.json")
        report_path.write_text(json.dumps(report_json, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")
        summary = (f"wrote {out} and {report_path}; achieved grade "
                   f"{report_json['achieved_grade']} (target {target})")
    else:
        summary = doc + "\n" + json.dumps(report_json, indent=2, sort_keys=True)
    _emit(args, {"document": doc, "report": report_json}, summary)
    return EX_OK


def cmd_vary(args) -> int:
    wall, routes = _load_document(args.file)
    route = _pick_route(routes, args.route, args.file)
    params = _engine_params(args)
    climber = climber_from_json(None)
    try:
        beta = plan_beta(route, wall, climber, params=params)
    except (UnreachableError, PlannerError) as e:
        print(f"{route.name}: {e}", file=sys.stderr)
        return EX_VALIDATION
    varied_route, varied_wall = vary_route(route, wall, beta, args.intensity, args.seed)
    doc = serialize_document(varied_wall, (varied_route,))
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
        _emit(args, {"document": doc}, f"wrote {args.out}")
    else:
        _emit(args, {"document": doc}, doc.rstrip("\n"))
    return EX_OK


def cmd_simulate(args) -> int:
    wall, routes = _load_document(args.file)
    route = _pick_route(routes, args.route, args.file)
    params = _engine_params(args)
    population = _population(args, args.seed)
    successes = 0
    trials = args.trials
    for t in range(trials):
        climber = population[t % len(population)]
        rng = derive_rng(args.seed, "trial", t)
        if simulate_ascent(route, wall, climber, rng, params=params).success:
            successes += 1
    freq = successes / trials if trials else 0.0
    mean_p = float(np.mean([route_success_probability(route, wall, c, params=params)
                            for c in population]))
    payload = {"route": route.name, "trials": trials, "successes": successes,
               "frequency": freq, "mean_analytic_probability": mean_p}
    _emit(args, payload,
          f"route {route.name}: {successes}/{trials} ascents "
          f"(freq {freq:.4f}, analytic mean {mean_p:.4f})")
    return EX_OK


def cmd_serve(args) -> int:
    import uvicorn

    store = CorpusStore(args.corpus)
    params = _engine_params(args)
    pop_spec = DEFAULT_POPULATION
    if args.population:
        pop_spec = PopulationSpec.from_json(json.loads(Path(args.population).read_text()))
    ui_dir = Path(args.ui) if args.ui else None
    if ui_dir is None and Path("frontend/dist/index.html").exists():
        ui_dir = Path("frontend/dist")
    app = create_app(store, params=params, population_spec=pop_spec,
                     max_jobs=args.max_jobs, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EX_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="crux", description="Route-setting engine CLI")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, corpus: bool = False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="engine params JSON file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if corpus:
            p.add_argument("--corpus", required=True, help="corpus directory")

    p = sub.add_parser("parse", help="parse and canonically echo a .crux document")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("beta", help="plan the least-resistance beta")
    p.add_argument("file")
    p.add_argument("--route")
    p.add_argument("--climber", help="climber JSON file")
    common(p)
    p.set_defaults(fn=cmd_beta)

    p = sub.add_parser("grade", help="assign a grade against a corpus")
    p.add_argument("file")
    p.add_argument("--route")
    p.add_argument("--tnorm", choices=["product", "minimum", "lukasiewicz"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--population", help="population spec JSON file")
    common(p, corpus=True)
    p.set_defaults(fn=cmd_grade)

    p = sub.add_parser("generate", help="search hold placements for a target grade")
    p.add_argument("--wall", required=True)
    p.add_argument("--route", help="seed route name inside the wall document")
    p.add_argument("--target-grade", required=True)
    p.add_argument("--target-style", help="style vector JSON file")
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--hold-budget", type=int, default=12)
    p.add_argument("--in-loop-population", type=int, default=200)
    p.add_argument("--population", help="population spec JSON file")
    p.add_argument("--out", help="output .crux path")
    common(p, corpus=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("vary", help="chaos-driven variation of a route")
    p.add_argument("file")
    p.add_argument("--route")
    p.add_argument("--intensity", type=float, default=0.3)
    p.add_argument("--out")
    common(p)
    p.set_defaults(fn=cmd_vary)

    p = sub.add_parser("simulate", help="Monte-Carlo ascent simulation")
    p.add_argument("file")
    p.add_argument("--route")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--population", help="population spec JSON file")
    common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--corpus", default=os.environ.get("CRUX_CORPUS", "corpus"),
                   help="corpus directory (env CRUX_CORPUS overrides the default)")
    p.add_argument("--population", help="population spec JSON file")
    p.add_argument("--max-jobs", type=int, default=2)
    p.add_argument("--ui", help="directory with the built UI bundle")
    common(p)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EX_INTERNAL
    except BrokenPipeError:
        return EX_OK
    except Exception as e:  # noqa: BLE001 - last-resort CLI guard
        print(f"internal error: {e}", file=sys.stderr)
        return EX_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
