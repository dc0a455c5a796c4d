"""Event-driven timeline simulator for in-order command queues.

Commands of a task group are placed into FIFO queues (HtD / DtH / K on a
two-DMA device; one shared transfer queue plus K on a one-DMA device,
with every HtD of a group queued ahead of its DtH commands).  Only queue
heads can execute.  Simulated time jumps between command start/finish
events; while an HtD and a DtH execute together on a two-DMA device, both
are slowed by the profile's overlap factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .model import DeviceProfile, TaskSpec, UnresolvableDuration, stage_times

KIND_HTD = "HtD"
KIND_K = "K"
KIND_DTH = "DtH"
KINDS = (KIND_HTD, KIND_K, KIND_DTH)

# Finalization order for simultaneous command ends.
_FINALIZE_ORDER = (KIND_HTD, KIND_DTH, KIND_K)

_END_EPS = 1e-9  # ms


@dataclass
class Command:
    task_id: str
    kind: str
    nominal_duration: float
    start: Optional[float] = None
    end: Optional[float] = None
    remaining_work: float = 1.0  # fraction of nominal duration left


@dataclass
class Timeline:
    """Finalized commands of one simulated execution plus summary figures."""

    commands: List[Command]
    makespan: float
    idle: Dict[str, float]  # per command kind, between first start and last end

    def commands_of_kind(self, kind: str) -> List[Command]:
        return [c for c in self.commands if c.kind == kind]


def recompute_overlap(
    executing_htd: Command,
    executing_dth: Command,
    now: float,
    profile: DeviceProfile,
) -> Tuple[float, float]:
    """Provisional end times for two transfers overlapping from ``now``.

    The work each command still has left is stretched by 1/sigma for as
    long as both DMA engines stay busy.
    """
    sigma = profile.overlap_sigma
    new_end_htd = now + executing_htd.remaining_work * executing_htd.nominal_duration / sigma
    new_end_dth = now + executing_dth.remaining_work * executing_dth.nominal_duration / sigma
    return new_end_htd, new_end_dth


def idle_report(commands: Sequence[Command]) -> Dict[str, float]:
    """Total per-kind gap time between first start and last end."""
    report: Dict[str, float] = {}
    for kind in KINDS:
        spans = sorted(
            ((c.start, c.end) for c in commands if c.kind == kind and c.start is not None),
        )
        idle = 0.0
        for (_, prev_end), (start, _) in zip(spans, spans[1:]):
            if start > prev_end:
                idle += start - prev_end
        report[kind] = idle
    return report


class DeviceSim:
    """Stepwise device simulator.

    Task groups may be submitted incrementally at the current simulated
    time; the harness uses this to model a proxy thread appending batches
    behind commands still in flight.  ``deps`` maps a task id to a
    prerequisite task id whose last command must finish before any
    command of the dependent task may start.
    """

    def __init__(self, profile: DeviceProfile):
        self.profile = profile
        self.now = 0.0
        self._k_queue: List[Command] = []
        if profile.dma_engines == 2:
            self._queues: Dict[str, List[Command]] = {
                KIND_HTD: [],
                KIND_DTH: [],
                KIND_K: self._k_queue,
            }
        else:
            self._queues = {"XFER": [], KIND_K: self._k_queue}
        self._heads: Dict[str, int] = {lane: 0 for lane in self._queues}
        self._executing: Dict[str, Optional[Command]] = {lane: None for lane in self._queues}
        self._done_stages: Dict[str, set] = {}
        self._pending_count: Dict[str, int] = {}
        self._deps: Dict[str, str] = {}
        self._finished_tasks: set = set()
        self.commands: List[Command] = []

    # -- submission ---------------------------------------------------

    def submit(
        self,
        tasks: Sequence[TaskSpec],
        deps: Optional[Dict[str, str]] = None,
    ) -> List[Command]:
        """Append the commands of an ordered task group to the queues."""
        if deps:
            self._deps.update(deps)
        submitted: List[Command] = []
        group_dth: List[Command] = []
        for task in tasks:
            if task.id in self._done_stages:
                raise ValueError(f"task id {task.id!r} already submitted")
            t_htd, t_k, t_dth = stage_times(task, self.profile)
            if t_htd <= 0 and t_k <= 0 and t_dth <= 0:
                raise UnresolvableDuration(f"task {task.id!r} has no commands")
            done = set()
            count = 0
            for kind, dur in ((KIND_HTD, t_htd), (KIND_K, t_k), (KIND_DTH, t_dth)):
                if dur <= 0:
                    done.add(kind)
            self._done_stages[task.id] = done
            if t_htd > 0:
                cmd = Command(task.id, KIND_HTD, t_htd)
                self._xfer_queue(KIND_HTD).append(cmd)
                submitted.append(cmd)
                count += 1
            if t_k > 0:
                cmd = Command(task.id, KIND_K, t_k)
                self._k_queue.append(cmd)
                submitted.append(cmd)
                count += 1
            if t_dth > 0:
                cmd = Command(task.id, KIND_DTH, t_dth)
                group_dth.append(cmd)
                submitted.append(cmd)
                count += 1
            self._pending_count[task.id] = count
        # One-DMA launch order: every HtD of the group before its DtHs.
        self._xfer_queue(KIND_DTH).extend(group_dth)
        self.commands.extend(submitted)
        return submitted

    def _xfer_queue(self, kind: str) -> List[Command]:
        if self.profile.dma_engines == 2:
            return self._queues[kind]
        return self._queues["XFER"]

    # -- readiness ----------------------------------------------------

    def _stage_done(self, task_id: str, kind: str) -> bool:
        return kind in self._done_stages[task_id]

    def _ready(self, cmd: Command) -> bool:
        dep = self._deps.get(cmd.task_id)
        if dep is not None and dep not in self._finished_tasks:
            return False
        if cmd.kind == KIND_K:
            return self._stage_done(cmd.task_id, KIND_HTD)
        if cmd.kind == KIND_DTH:
            return self._stage_done(cmd.task_id, KIND_K) and self._stage_done(
                cmd.task_id, KIND_HTD
            )
        return True

    # -- stepping -----------------------------------------------------

    def step(self) -> Optional[List[Command]]:
        """Advance to the next command-finish event.

        Returns the commands finalized at the new simulated time, or
        None when nothing is executing and nothing can start.
        """
        for lane, queue in self._queues.items():
            if self._executing[lane] is None:
                head = self._heads[lane]
                if head < len(queue) and self._ready(queue[head]):
                    cmd = queue[head]
                    cmd.start = self.now
                    self._executing[lane] = cmd

        running = [c for c in self._executing.values() if c is not None]
        if not running:
            return None

        overlapped = (
            self.profile.dma_engines == 2
            and any(c.kind == KIND_HTD for c in running)
            and any(c.kind == KIND_DTH for c in running)
        )
        sigma = self.profile.overlap_sigma

        def rate(cmd: Command) -> float:
            return sigma if (overlapped and cmd.kind != KIND_K) else 1.0

        dt = min(c.remaining_work * c.nominal_duration / rate(c) for c in running)
        self.now += dt
        for c in running:
            left = c.remaining_work * c.nominal_duration - dt * rate(c)
            c.remaining_work = max(left, 0.0) / c.nominal_duration

        finalized: List[Command] = []
        for kind in _FINALIZE_ORDER:
            for lane, queue in self._queues.items():
                cmd = self._executing[lane]
                if cmd is None or cmd.kind != kind:
                    continue
                if cmd.remaining_work * cmd.nominal_duration <= _END_EPS:
                    cmd.remaining_work = 0.0
                    cmd.end = self.now
                    self._executing[lane] = None
                    self._heads[lane] += 1
                    self._done_stages[cmd.task_id].add(cmd.kind)
                    self._pending_count[cmd.task_id] -= 1
                    if self._pending_count[cmd.task_id] == 0:
                        self._finished_tasks.add(cmd.task_id)
                    finalized.append(cmd)
        return finalized

    def drained(self) -> bool:
        return all(self._heads[lane] >= len(q) for lane, q in self._queues.items())

    def run(self) -> None:
        """Step until every submitted command has finalized."""
        while not self.drained():
            if self.step() is None:
                raise RuntimeError("simulation stalled with commands pending")

    def task_finished(self, task_id: str) -> bool:
        return task_id in self._finished_tasks

    def timeline(self) -> Timeline:
        cmds = sorted(self.commands, key=lambda c: (c.start, c.end, KINDS.index(c.kind)))
        makespan = max(c.end for c in cmds) if cmds else 0.0
        return Timeline(commands=cmds, makespan=makespan, idle=idle_report(cmds))


def simulate(
    tasks: Sequence[TaskSpec],
    profile: DeviceProfile,
    deps: Optional[Dict[str, str]] = None,
) -> Timeline:
    """Simulate one ordered task group and return its full timeline."""
    if not tasks:
        raise ValueError("task group must be non-empty")
    sim = DeviceSim(profile)
    sim.submit(tasks, deps)
    sim.run()
    return sim.timeline()
