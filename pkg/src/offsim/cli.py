"""Command-line front end.

Subcommands: simulate, schedule, permute, bench, validate.  Task sets
and device profiles are JSON files; the bundled benchmarks (BK0 .. BK100)
and profiles (1dma, 2dma) can be referenced by name instead of a path.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from importlib import resources
from itertools import permutations
from typing import List, Optional, Sequence

from . import engine, heuristic, io, oracle, workload
from .model import DeviceProfile, OffsimError, TaskSpec
from .trace import export_table, export_trace

BUNDLED_PROFILES = {"1dma": "one_dma.json", "2dma": "two_dma.json"}

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class UnknownTaskId(OffsimError):
    pass


def _bundled(subdir: str, filename: str):
    return resources.files("offsim").joinpath("data", subdir, filename)


def load_profile_arg(arg: str) -> DeviceProfile:
    if arg in BUNDLED_PROFILES:
        with resources.as_file(_bundled("profiles", BUNDLED_PROFILES[arg])) as path:
            return io.load_profile(path)
    return io.load_profile(arg)


def load_taskset_arg(arg: str) -> List[TaskSpec]:
    if arg in workload.BK_NAMES:
        return list(workload.load_bk_benchmark(arg).tasks)
    return io.load_taskset(arg)


def _apply_order(tasks: List[TaskSpec], order: str) -> List[TaskSpec]:
    by_id = {t.id: t for t in tasks}
    ids = [s.strip() for s in order.split(",") if s.strip()]
    if sorted(ids) != sorted(by_id):
        unknown = [i for i in ids if i not in by_id]
        if unknown:
            raise UnknownTaskId(f"unknown task ids in --order: {unknown}")
        raise UnknownTaskId("--order must be a permutation of the task set ids")
    return [by_id[i] for i in ids]


def _cmd_simulate(args) -> int:
    tasks = load_taskset_arg(args.tasks)
    profile = load_profile_arg(args.profile)
    if args.order:
        tasks = _apply_order(tasks, args.order)
    timeline = engine.simulate(tasks, profile)
    print(f"makespan {timeline.makespan:.3f} ms")
    if args.out:
        io.write_json(io.timeline_to_doc(timeline), args.out)
    if args.trace:
        io.write_json(export_trace(timeline), args.trace)
    if args.table:
        with open(args.table, "w") as fh:
            fh.write(export_table(timeline))
    return EXIT_OK


def _cmd_schedule(args) -> int:
    tasks = load_taskset_arg(args.tasks)
    profile = load_profile_arg(args.profile)
    ordered = heuristic.reorder_batch(tasks, profile)
    makespan = engine.simulate(ordered, profile).makespan
    print("ordering " + " ".join(t.id for t in ordered))
    print(f"makespan {makespan:.3f} ms")
    if args.out:
        io.write_json(
            {
                "type": "schedule",
                "ordering": [t.id for t in ordered],
                "makespan_ms": io.fmt_ms(makespan),
            },
            args.out,
        )
    return EXIT_OK


def _cmd_permute(args) -> int:
    tasks = load_taskset_arg(args.tasks)
    profile = load_profile_arg(args.profile)
    report = oracle.exhaustive_search(tasks, profile, cap=args.cap, seed=args.seed)
    ordered = heuristic.reorder_batch(tasks, profile)
    h_makespan = engine.simulate(ordered, profile).makespan
    below = sum(1 for m in report.makespans if m < h_makespan)
    percentile = 100.0 * below / len(report.makespans)
    print(f"orderings {len(report.makespans)}" + ("" if report.exhaustive else " (sampled)"))
    print(f"best {report.best:.3f} ms")
    print(f"median {report.median:.3f} ms")
    print(f"worst {report.worst:.3f} ms")
    print(f"heuristic {h_makespan:.3f} ms (percentile {percentile:.1f})")
    if args.out:
        doc = io.permutation_report_to_doc(report)
        doc["heuristic_makespan_ms"] = io.fmt_ms(h_makespan)
        doc["heuristic_percentile"] = f"{percentile:.1f}"
        io.write_json(doc, args.out)
    return EXIT_OK


def _scenario_from_config(doc: dict, source: str) -> workload.Scenario:
    for key in ("workers", "batch_depth", "seed", "profile"):
        if key not in doc:
            raise io.ParseError(f"{source}: bench config missing {key!r}")
    if "benchmark" in doc:
        pool = workload.load_bk_benchmark(doc["benchmark"])
    elif "tasks" in doc:
        pool = workload.make_benchmark("custom", io.load_taskset(doc["tasks"]))
    elif "real_device" in doc:
        pool = workload.make_benchmark(
            f"real-{doc['real_device']}",
            workload.sample_real_tasks(
                doc["real_device"], int(doc.get("pool_size", 8)), int(doc["seed"])
            ),
        )
    else:
        raise io.ParseError(
            f"{source}: bench config needs 'benchmark', 'tasks' or 'real_device'"
        )
    return workload.Scenario(
        workers=int(doc["workers"]),
        batch_depth=int(doc["batch_depth"]),
        pool=pool,
        seed=int(doc["seed"]),
        profile=load_profile_arg(doc["profile"]),
    )


def _cmd_bench(args) -> int:
    doc = io._load_json(args.config)
    scenario = _scenario_from_config(doc, args.config)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", workload.CapExceeded)
        result = workload.run_scenario(scenario, evaluate_noreorder=True, cap=args.cap)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"heuristic speedup {result.speedup_heuristic:.3f}")
    print(f"median speedup {result.speedup_median:.3f}")
    print(f"best speedup {result.speedup_best:.3f}")
    print(f"scheduling overhead {result.scheduling_overhead_ms:.2f} ms per TG")
    if args.out:
        io.write_json(io.scenario_result_to_doc(result, scenario_doc=doc), args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    names = [s.strip() for s in args.benchmarks.split(",") if s.strip()]
    if not names:
        raise io.ParseError("empty benchmark selector")
    profiles = [load_profile_arg(name) for name in ("1dma", "2dma")]
    tolerance = 2.0 * args.dt
    max_dev = 0.0
    checked = 0
    for name in names:
        tasks = list(workload.load_bk_benchmark(name).tasks)
        for profile in profiles:
            for perm in permutations(tasks):
                m_engine = engine.simulate(list(perm), profile).makespan
                m_micro = oracle.micro_simulate(list(perm), profile, dt=args.dt).makespan
                max_dev = max(max_dev, abs(m_engine - m_micro))
                checked += 1
    ok = max_dev <= tolerance
    print(f"checked {checked} orderings, max deviation {max_dev:.6f} ms "
          f"(tolerance {tolerance:.6f} ms): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="offsim",
        description="Makespan prediction and batch reordering for accelerator offload",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, tasks=True):
        if tasks:
            p.add_argument("--tasks", required=True, help="task set file or bundled BK name")
        p.add_argument("--profile", required=True, help="profile file or '1dma'/'2dma'")
        p.add_argument("--out", help="write a JSON report here")

    p = sub.add_parser("simulate", help="simulate a task set in a given order")
    add_common(p)
    p.add_argument("--order", help="comma-separated task ids")
    p.add_argument("--trace", help="write a trace-event JSON here")
    p.add_argument("--table", help="write a tab-separated timeline here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("schedule", help="compute a near-optimal submission order")
    add_common(p)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("permute", help="makespan distribution over orderings")
    add_common(p)
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_permute)

    p = sub.add_parser("bench", help="run a multi-worker scenario")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    p.add_argument("--out", help="write the scenario report here")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("validate", help="cross-check engine against the micro oracle")
    p.add_argument("--dt", type=float, default=oracle.DEFAULT_DT, help="micro step in ms")
    p.add_argument(
        "--benchmarks",
        default=",".join(workload.BK_NAMES),
        help="comma-separated benchmark names",
    )
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OffsimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
