"""Command-line pipeline: generate, route, schedule, validate, export.

Every subcommand works on the JSON files from :mod:`truckcrew.netgen`.
``solve`` chains the whole pipeline in one shot.  Reports are written as
tab-separated stats files with stable column names, optionally with a
Gantt figure rendered next to them.

Exit codes: 0 success, 1 validation failure, 2 bad input or parse error,
3 no valid truck routing exists, 4 no feasible crew schedule found.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import netgen, plot
from .lpemit import emit_stage1, emit_stage2
from .model import InputError, cost_stage1, cost_stage2, validate
from .netgen import GenParams, ParseError, RoadNetwork
from .oracle import brute_stage2
from .stage1 import Stage1Infeasible, route_trucks
from .stage2 import SearchConfig, aggregate_stats, run_restarts

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2
EXIT_STAGE1 = 3
EXIT_NO_SCHEDULE = 4

STATS_FIELDS = ("iterations", "fails", "fails_rate", "z3_min", "z3_avg", "z3_max", "time_to_best_s")


def _load_network(path: str | None) -> RoadNetwork:
    if path is None:
        return netgen.default_network()
    raw = netgen._load_json(path)
    try:
        return RoadNetwork(
            locations=tuple(raw["locations"]),
            edges=tuple((a, b, float(km)) for a, b, km in raw["edges"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed network ({exc})") from exc


def _apply_config_file(args: argparse.Namespace, keys: tuple[str, ...]):
    """Fill unset options from a JSON config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    doc = netgen._load_json(args.config)
    if not isinstance(doc, dict):
        raise ParseError(f"{args.config}: config must be a JSON object")
    for key, value in doc.items():
        attr = key.replace("-", "_")
        if attr not in keys:
            raise ParseError(f"{args.config}: unknown config key {key!r}")
        if getattr(args, attr, None) is None:
            setattr(args, attr, value)


def _search_config(args: argparse.Namespace) -> SearchConfig:
    alg = int(args.alg if args.alg is not None else 3)
    time_limit = args.time_limit
    max_iterations = args.max_iterations
    if time_limit is None and max_iterations is None:
        time_limit = 30.0
    return SearchConfig.for_algorithm(
        alg,
        alpha=float(args.alpha if args.alpha is not None else 0.2),
        crew_max=int(args.crew_max if args.crew_max is not None else 2),
        time_limit_s=None if time_limit is None else float(time_limit),
        max_iterations=None if max_iterations is None else int(max_iterations),
        seed=int(args.seed if args.seed is not None else 0),
        regulation=args.regulation if args.regulation is not None else "l1",
    )


def _fmt_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_stats(path: str, record: dict):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(STATS_FIELDS) + "\n")
        fh.write("\t".join(_fmt_value(record[k]) for k in STATS_FIELDS) + "\n")


def _print_stats(record: dict):
    for key in STATS_FIELDS:
        print(f"{key}={_fmt_value(record[key])}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args) -> int:
    params = GenParams(
        horizon_days=args.horizon,
        num_requests=args.requests,
        num_trucks=args.trucks,
        num_drivers=args.drivers,
        seed=args.seed,
        co_location_prob=args.co_location_prob,
    )
    instance = netgen.generate(params, _load_network(args.network))
    netgen.save_instance(instance, args.output)
    print(f"instance={args.output} requests={len(instance.requests)} "
          f"trucks={len(instance.trucks)} drivers={len(instance.drivers)}")
    return EXIT_OK


def _route_one(instance, args, seed: int, out_path: str) -> int:
    plan = route_trucks(instance, lam=args.lam, alpha=args.alpha, seed=seed)
    netgen.save_plan(plan, out_path)
    z1, z2, z12 = cost_stage1(plan, args.lam)
    print(f"plan={out_path} seed={seed} tasks={len(plan.tasks)} "
          f"z1={z1:.6g} z2={z2:.6g} z12={z12:.6g}")
    return EXIT_OK


def _cmd_route(args) -> int:
    _apply_config_file(args, ("lam", "alpha", "seed", "runs"))
    args.lam = float(args.lam if args.lam is not None else 0.25)
    args.alpha = float(args.alpha if args.alpha is not None else 0.2)
    seed = int(args.seed if args.seed is not None else 0)
    runs = int(args.runs if args.runs is not None else 1)
    instance = netgen.load_instance(args.instance)
    if runs == 1:
        return _route_one(instance, args, seed, args.output)
    stem, dot, ext = args.output.rpartition(".")
    if not dot:
        stem, ext = args.output, "json"
    for k in range(runs):
        _route_one(instance, args, seed + k, f"{stem}_{k}.{ext}")
    return EXIT_OK


def _cmd_schedule(args) -> int:
    _apply_config_file(
        args,
        ("alg", "alpha", "seed", "time_limit", "max_iterations", "regulation",
         "crew_max", "restarts"),
    )
    instance = netgen.load_instance(args.instance)
    plan = netgen.load_plan(args.plan, instance)
    config = _search_config(args)
    restarts = int(args.restarts if args.restarts is not None else 1)
    schedule, runs = run_restarts(plan, instance, config, restarts)
    record = aggregate_stats(runs)
    _print_stats(record)
    if args.stats:
        _write_stats(args.stats, record)
    if schedule is None:
        print("no feasible schedule found", file=sys.stderr)
        return EXIT_NO_SCHEDULE
    netgen.save_schedule(schedule, args.output)
    print(f"schedule={args.output} z3={cost_stage2(schedule):.6g}")
    if args.plot:
        plot.render_gantt(schedule, args.plot)
        print(f"gantt={args.plot}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    _apply_config_file(
        args,
        ("lam", "alpha", "alg", "seed", "time_limit", "max_iterations",
         "regulation", "crew_max", "restarts"),
    )
    if args.instance:
        instance = netgen.load_instance(args.instance)
    else:
        params = GenParams(
            horizon_days=args.horizon,
            num_requests=args.requests,
            num_trucks=args.trucks,
            num_drivers=args.drivers,
            seed=int(args.seed if args.seed is not None else 0),
        )
        instance = netgen.generate(params, _load_network(args.network))
        netgen.save_instance(instance, f"{args.out_prefix}instance.json")
        print(f"instance={args.out_prefix}instance.json")
    args.lam = float(args.lam if args.lam is not None else 0.25)
    args.alpha = float(args.alpha if args.alpha is not None else 0.2)
    seed = int(args.seed if args.seed is not None else 0)
    plan = route_trucks(instance, lam=args.lam, alpha=args.alpha, seed=seed)
    plan_path = f"{args.out_prefix}plan.json"
    netgen.save_plan(plan, plan_path)
    z1, z2, z12 = cost_stage1(plan, args.lam)
    print(f"plan={plan_path} tasks={len(plan.tasks)} z1={z1:.6g} z2={z2:.6g} z12={z12:.6g}")
    config = _search_config(args)
    restarts = int(args.restarts if args.restarts is not None else 1)
    schedule, runs = run_restarts(plan, instance, config, restarts)
    record = aggregate_stats(runs)
    _print_stats(record)
    _write_stats(f"{args.out_prefix}stats.tsv", record)
    print(f"stats={args.out_prefix}stats.tsv")
    if schedule is None:
        print("no feasible schedule found", file=sys.stderr)
        return EXIT_NO_SCHEDULE
    sched_path = f"{args.out_prefix}schedule.json"
    netgen.save_schedule(schedule, sched_path)
    print(f"schedule={sched_path} z3={cost_stage2(schedule):.6g}")
    if args.plot:
        gantt_path = f"{args.out_prefix}gantt.svg"
        plot.render_gantt(schedule, gantt_path)
        print(f"gantt={gantt_path}")
    leftovers = validate(schedule)
    if leftovers:
        for v in leftovers[:10]:
            print(f"violation kind={v.kind} subject={v.subject} detail={v.detail}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_validate(args) -> int:
    instance = netgen.load_instance(args.instance)
    schedule = netgen.load_schedule(args.schedule, instance)
    violations = validate(schedule)
    if not violations:
        print("feasible=1 violations=0")
        return EXIT_OK
    print(f"feasible=0 violations={len(violations)}")
    for v in violations:
        print(f"violation kind={v.kind} subject={v.subject} detail={v.detail}")
    return EXIT_VALIDATION


def _cmd_emit_lp(args) -> int:
    instance = netgen.load_instance(args.instance)
    stem = args.instance.rsplit(".", 1)[0]
    if args.stage == 1:
        text = emit_stage1(instance, float(args.lam if args.lam is not None else 0.25))
        out = args.output or f"{stem}_1.lp"
    else:
        if not args.plan:
            raise InputError("stage 2 emission needs --plan")
        plan = netgen.load_plan(args.plan, instance)
        text = emit_stage2(instance, plan)
        out = args.output or f"{stem}_2.lp"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"lp={out}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    instance = netgen.load_instance(args.instance)
    schedule = netgen.load_schedule(args.schedule, instance)
    plot.render_gantt(schedule, args.output)
    print(f"gantt={args.output}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    instance = netgen.load_instance(args.instance)
    plan = netgen.load_plan(args.plan, instance)
    best = brute_stage2(
        plan,
        instance,
        regulation=args.regulation or "l1",
        crew_max=int(args.crew_max if args.crew_max is not None else 2),
    )
    if best is None:
        print("infeasible")
        return EXIT_NO_SCHEDULE
    print(f"z3_optimal={best:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_schedule_flags(p: argparse.ArgumentParser):
    p.add_argument("--alg", type=int, choices=(1, 2, 3), default=None,
                   help="feature level: 1 plain, 2 +repair, 3 +perturbation (default 3)")
    p.add_argument("--alpha", type=float, default=None, help="candidate-list width (default 0.2)")
    p.add_argument("--time-limit", type=float, default=None, dest="time_limit",
                   help="wall-clock budget per restart in seconds")
    p.add_argument("--max-iterations", type=int, default=None, dest="max_iterations",
                   help="iteration cap per restart (deterministic runs)")
    p.add_argument("--regulation", choices=("l1", "l1l2", "l1l3"), default=None,
                   help="rest rules: base, +60h/week cap, +11h minimum break")
    p.add_argument("--crew-max", type=int, choices=(1, 2), default=None, dest="crew_max")
    p.add_argument("--restarts", type=int, default=None, help="independent seeded searches")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON file with defaults for these flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="truckcrew",
        description="Two-stage truck routing and crew scheduling toolkit.",
        epilog="Exit codes: 0 ok, 1 validation failure, 2 bad input, "
               "3 routing infeasible, 4 no feasible schedule.",
    )
    sub = parser.add_subparsers(
        dest="command",
        required=True,
        metavar="{gen,route,schedule,solve,validate,emit-lp,plot}",
    )

    p = sub.add_parser("gen", help="generate a random instance file")
    p.add_argument("--horizon", "-H", type=int, required=True, dest="horizon")
    p.add_argument("--requests", type=int, required=True)
    p.add_argument("--trucks", type=int, required=True)
    p.add_argument("--drivers", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--co-location-prob", type=float, default=0.8, dest="co_location_prob")
    p.add_argument("--network", default=None, help="road network JSON (default: bundled 15 cities)")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("route", help="build truck routes for an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--lambda", type=float, default=None, dest="lam",
                   help="delay-vs-distance blend (default 0.25)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=None, help="write several diversified plans")
    p.add_argument("--config", default=None)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=_cmd_route)

    p = sub.add_parser("schedule", help="crew-schedule a plan")
    p.add_argument("--instance", required=True)
    p.add_argument("--plan", required=True)
    _add_schedule_flags(p)
    p.add_argument("--stats", default=None, help="write the TSV stats report here")
    p.add_argument("--plot", default=None, help="render a Gantt figure here")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("solve", help="generate/load, route and schedule in one shot")
    p.add_argument("--instance", default=None, help="existing instance file (else generate)")
    p.add_argument("--horizon", "-H", type=int, default=7, dest="horizon")
    p.add_argument("--requests", type=int, default=10)
    p.add_argument("--trucks", type=int, default=4)
    p.add_argument("--drivers", type=int, default=8)
    p.add_argument("--network", default=None)
    p.add_argument("--lambda", type=float, default=None, dest="lam")
    _add_schedule_flags(p)
    p.add_argument("--plot", action="store_true", help="render a Gantt next to the stats")
    p.add_argument("--out-prefix", default="run_", dest="out_prefix")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("validate", help="check a schedule file, exit 0 iff feasible")
    p.add_argument("--instance", required=True)
    p.add_argument("--schedule", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("emit-lp", help="write the integer program of a stage as LP text")
    p.add_argument("--instance", required=True)
    p.add_argument("--stage", type=int, choices=(1, 2), required=True)
    p.add_argument("--plan", default=None, help="plan file (stage 2)")
    p.add_argument("--lambda", type=float, default=None, dest="lam")
    p.add_argument("--output", "-o", default=None,
                   help="default: <instance>_<stage>.lp")
    p.set_defaults(func=_cmd_emit_lp)

    p = sub.add_parser("plot", help="render a schedule as a Gantt figure")
    p.add_argument("--instance", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=_cmd_plot)

    # intentionally undocumented: exhaustive check for toy instances
    p = sub.add_parser("oracle")
    p.add_argument("--instance", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--regulation", choices=("l1", "l1l2", "l1l3"), default=None)
    p.add_argument("--crew-max", type=int, choices=(1, 2), default=None, dest="crew_max")
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Stage1Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
