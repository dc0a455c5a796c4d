"""JSON file formats: task sets, device profiles, and result reports.

Times in reports are serialized as decimal strings with microsecond
precision so that emitted documents are byte-stable and round-trip
without float drift.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Optional, Union

from .engine import Command, Timeline
from .model import MB, DeviceProfile, OffsimError, TaskSpec
from .oracle import PermutationReport
from .workload import ScenarioResult

PathLike = Union[str, Path]


class ParseError(OffsimError):
    """Malformed input file; message carries the file and offending field."""


def fmt_ms(value: float) -> str:
    return f"{value:.3f}"


def _load_json(path: PathLike) -> Dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def write_json(doc: Dict, path: PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- device profiles --------------------------------------------------


def profile_from_doc(doc: Dict, source: str = "<doc>") -> DeviceProfile:
    required = {"name", "dma_engines"}
    missing = required - doc.keys()
    if missing:
        raise ParseError(f"{source}: profile missing fields {sorted(missing)}")
    try:
        return DeviceProfile(
            name=doc["name"],
            dma_engines=int(doc["dma_engines"]),
            htd_latency_ms=float(doc.get("htd_latency_ms", 0.0)),
            htd_bandwidth=float(doc.get("htd_bandwidth_mb_per_ms", 1.0)) * MB,
            dth_latency_ms=float(doc.get("dth_latency_ms", 0.0)),
            dth_bandwidth=float(doc.get("dth_bandwidth_mb_per_ms", 1.0)) * MB,
            overlap_sigma=float(doc.get("overlap_sigma", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{source}: invalid profile: {exc}") from exc


def load_profile(path: PathLike) -> DeviceProfile:
    return profile_from_doc(_load_json(path), source=str(path))


# -- task sets --------------------------------------------------------

_DURATION_KEYS = ("htd_ms", "k_ms", "dth_ms")
_SIZE_KEYS = ("htd_bytes", "work", "eta", "gamma", "dth_bytes")


def _task_from_record(record: Dict, source: str) -> TaskSpec:
    if "id" not in record:
        raise ParseError(f"{source}: task record without an 'id' field")
    tid = str(record["id"])
    has_durations = any(k in record for k in _DURATION_KEYS)
    has_sizes = any(k in record for k in _SIZE_KEYS)
    if has_durations and has_sizes:
        raise ParseError(
            f"{source}: task {tid!r} mixes duration fields with size fields"
        )
    try:
        if has_durations:
            return TaskSpec(
                id=tid,
                fixed_durations=(
                    float(record.get("htd_ms", 0.0)),
                    float(record.get("k_ms", 0.0)),
                    float(record.get("dth_ms", 0.0)),
                ),
            )
        if has_sizes:
            return TaskSpec(
                id=tid,
                htd_bytes=float(record.get("htd_bytes", 0.0)),
                kernel_work=float(record.get("work", 0.0)),
                eta=float(record.get("eta", 0.0)),
                gamma=float(record.get("gamma", 0.0)),
                dth_bytes=float(record.get("dth_bytes", 0.0)),
            )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{source}: task {tid!r}: {exc}") from exc
    raise ParseError(f"{source}: task {tid!r} has neither durations nor sizes")


def load_taskset(path: PathLike) -> List[TaskSpec]:
    doc = _load_json(path)
    records = doc.get("tasks")
    if not isinstance(records, list) or not records:
        raise ParseError(f"{path}: expected a non-empty 'tasks' list")
    tasks = [_task_from_record(r, str(path)) for r in records]
    seen = set()
    for t in tasks:
        if t.id in seen:
            raise ParseError(f"{path}: duplicate task id {t.id!r}")
        seen.add(t.id)
    return tasks


# -- reports ----------------------------------------------------------


def timeline_to_doc(timeline: Timeline) -> Dict:
    return {
        "type": "timeline",
        "makespan_ms": fmt_ms(timeline.makespan),
        "idle_ms": {kind: fmt_ms(v) for kind, v in timeline.idle.items()},
        "commands": [
            {
                "task": c.task_id,
                "kind": c.kind,
                "start_ms": fmt_ms(c.start),
                "end_ms": fmt_ms(c.end),
            }
            for c in timeline.commands
        ],
    }


def timeline_from_doc(doc: Dict) -> Timeline:
    commands = [
        Command(
            task_id=c["task"],
            kind=c["kind"],
            nominal_duration=float(c["end_ms"]) - float(c["start_ms"]),
            start=float(c["start_ms"]),
            end=float(c["end_ms"]),
            remaining_work=0.0,
        )
        for c in doc["commands"]
    ]
    return Timeline(
        commands=commands,
        makespan=float(doc["makespan_ms"]),
        idle={kind: float(v) for kind, v in doc["idle_ms"].items()},
    )


def permutation_report_to_doc(report: PermutationReport) -> Dict:
    return {
        "type": "permutation_report",
        "count": len(report.makespans),
        "exhaustive": report.exhaustive,
        "best_ordering": list(report.best_ordering),
        "best_ms": fmt_ms(report.best),
        "median_ms": fmt_ms(report.median),
        "worst_ms": fmt_ms(report.worst),
        "geomean_ms": fmt_ms(report.geomean),
        "entries": [
            {"ordering": list(o), "makespan_ms": fmt_ms(m)}
            for o, m in zip(report.orderings, report.makespans)
        ],
    }


def permutation_report_from_doc(doc: Dict) -> PermutationReport:
    return PermutationReport(
        orderings=[tuple(e["ordering"]) for e in doc["entries"]],
        makespans=[float(e["makespan_ms"]) for e in doc["entries"]],
        best_ordering=tuple(doc["best_ordering"]),
        best=float(doc["best_ms"]),
        worst=float(doc["worst_ms"]),
        median=float(doc["median_ms"]),
        geomean=float(doc["geomean_ms"]),
        exhaustive=bool(doc["exhaustive"]),
    )


def scenario_result_to_doc(result: ScenarioResult, scenario_doc: Optional[Dict] = None) -> Dict:
    """Serialize a scenario result.

    Wall-clock scheduling overhead is intentionally left out so that a
    fixed seed produces a byte-identical report; the CLI prints the
    overhead separately.
    """
    doc = {
        "type": "scenario_result",
        "heuristic_makespan_ms": fmt_ms(result.heuristic_makespan),
        "tg_sizes": result.tg_sizes,
        "timeline": timeline_to_doc(result.timeline),
    }
    if scenario_doc is not None:
        doc["scenario"] = scenario_doc
    if result.noreorder is not None:
        doc["noreorder"] = permutation_report_to_doc(result.noreorder)
        doc["speedup_heuristic"] = fmt_ms(result.speedup_heuristic)
        doc["speedup_median"] = fmt_ms(result.speedup_median)
        doc["speedup_best"] = fmt_ms(result.speedup_best)
    return doc
