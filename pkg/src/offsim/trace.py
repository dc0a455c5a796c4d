"""Timeline export: trace-event JSON for trace viewers plus a flat table."""

from __future__ import annotations

from typing import Dict, List

from .engine import KINDS, Timeline

_LANE_TID = {kind: tid for tid, kind in enumerate(KINDS)}


def export_trace(timeline: Timeline) -> Dict:
    """Trace-event document (timestamps in integer microseconds).

    One complete ("X") event per command; each command kind gets its own
    lane so HtD / K / DtH activity lines up visually.
    """
    events: List[Dict] = [
        {
            "name": "thread_name",
            "ph": "M",
            "pid": 0,
            "tid": _LANE_TID[kind],
            "args": {"name": kind},
        }
        for kind in KINDS
    ]
    for cmd in timeline.commands:
        events.append(
            {
                "name": f"{cmd.task_id} {cmd.kind}",
                "ph": "X",
                "ts": round(cmd.start * 1000),
                "dur": round((cmd.end - cmd.start) * 1000),
                "pid": 0,
                "tid": _LANE_TID[cmd.kind],
                "args": {"task": cmd.task_id},
            }
        )
    return {"traceEvents": events, "displayTimeUnit": "ms"}


def export_table(timeline: Timeline) -> str:
    """Tab-separated command table: task_id, kind, start_ms, end_ms."""
    lines = ["task_id\tkind\tstart_ms\tend_ms"]
    for cmd in timeline.commands:
        lines.append(f"{cmd.task_id}\t{cmd.kind}\t{cmd.start:.3f}\t{cmd.end:.3f}")
    return "\n".join(lines) + "\n"
