"""Greedy, simulation-guided construction of a near-optimal task ordering.

The batch reordering algorithm seeds the schedule with a task whose
kernel is long relative to its HtD transfer, grows it by simulating each
remaining candidate appended to the partial schedule and keeping the one
with the earliest estimated batch completion, and places the final two
tasks by trying both completions.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .engine import KIND_K, simulate
from .model import DeviceProfile, TaskSpec, stage_times


def _by_id(tasks: Sequence[TaskSpec]) -> List[TaskSpec]:
    return sorted(tasks, key=lambda t: t.id)


def select_first_task(rt: Sequence[TaskSpec], profile: DeviceProfile) -> TaskSpec:
    """Task maximizing t_K - t_HtD; ties go to the longer DtH, then the id."""
    if not rt:
        raise ValueError("remaining task set is empty")

    def key(task: TaskSpec):
        t_htd, t_k, t_dth = stage_times(task, profile)
        return (-(t_k - t_htd), -t_dth, task.id)

    return min(rt, key=key)


def _completion_estimate(
    partial, rest: Sequence[TaskSpec], profile: DeviceProfile
) -> float:
    """Lower bound on the full-batch makespan after a partial schedule.

    Kernels never overlap each other, so the remaining kernel work must
    serialize behind the last scheduled kernel, and some task's DtH must
    trail the final kernel; scoring candidates on this bound instead of
    the bare partial makespan stops the greedy loop from spending the
    batch's best transfer/kernel overlap on an early pick and leaving an
    uncoverable transfer tail.
    """
    k_end = max((c.end for c in partial.commands if c.kind == KIND_K), default=0.0)
    rest_kernels = sum(stage_times(r, profile)[1] for r in rest)
    tail = min(stage_times(r, profile)[2] for r in rest)
    return max(partial.makespan, k_end + rest_kernels + tail)


def select_next_task(
    rt: Sequence[TaskSpec],
    ot: Sequence[TaskSpec],
    profile: DeviceProfile,
) -> TaskSpec:
    """Candidate whose appended partial schedule promises the earliest finish.

    Each candidate is scored by simulating the partial schedule with it
    appended and taking the completion estimate over the tasks that would
    remain.  Ties break on kernel-resource idle time, then on the task id.
    """
    if not rt:
        raise ValueError("remaining task set is empty")
    if not ot:
        raise ValueError("ordered task list is empty")
    if len(rt) == 1:
        return rt[0]
    best: Optional[Tuple[float, float, str]] = None
    best_task: Optional[TaskSpec] = None
    for cand in _by_id(rt):
        tl = simulate(list(ot) + [cand], profile)
        rest = [r for r in rt if r is not cand]
        key = (_completion_estimate(tl, rest, profile), tl.idle[KIND_K], cand.id)
        if best is None or key < best:
            best = key
            best_task = cand
    return best_task


def select_last_tasks(
    rt: Sequence[TaskSpec],
    ot: Sequence[TaskSpec],
    profile: DeviceProfile,
) -> Tuple[TaskSpec, TaskSpec]:
    """Order the final two tasks by simulating both completions.

    On equal makespans the task with the shorter DtH goes last, so the
    device is not left idle behind one long trailing transfer.
    """
    if len(rt) != 2:
        raise ValueError("select_last_tasks needs exactly two remaining tasks")
    a, b = _by_id(rt)
    m_ab = simulate(list(ot) + [a, b], profile).makespan
    m_ba = simulate(list(ot) + [b, a], profile).makespan
    if m_ab < m_ba:
        return a, b
    if m_ba < m_ab:
        return b, a
    dth_a = stage_times(a, profile)[2]
    dth_b = stage_times(b, profile)[2]
    return (b, a) if dth_a <= dth_b else (a, b)


def reorder_batch(tg: Sequence[TaskSpec], profile: DeviceProfile) -> List[TaskSpec]:
    """Near-optimal submission order for a task group.

    Returns a permutation of ``tg``.  Groups of one or two tasks skip the
    greedy loop.
    """
    if not tg:
        raise ValueError("task group is empty")
    if len(tg) == 1:
        return [tg[0]]
    if len(tg) == 2:
        return list(select_last_tasks(tg, [], profile))
    rt = list(tg)
    first = select_first_task(rt, profile)
    ot = [first]
    rt.remove(first)
    while len(rt) > 2:
        nxt = select_next_task(rt, ot, profile)
        ot.append(nxt)
        rt.remove(nxt)
    return ot + list(select_last_tasks(rt, ot, profile))
