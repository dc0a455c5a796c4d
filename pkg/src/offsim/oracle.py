"""Ground-truth machinery: micro-stepped simulator and permutation search.

The micro simulator advances a fixed-dt clock and is deliberately
independent of the event-driven engine; agreement between the two is the
validation check for the engine.  The permutation search bounds the
reordering heuristic from above and below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import engine
from ._micro import micro_core
from .engine import Command, Timeline, idle_report
from .model import DeviceProfile, TaskSpec, stage_times

DEFAULT_DT = 0.001  # ms
DEFAULT_CAP = 10_000


@dataclass
class PermutationReport:
    """Makespan distribution over evaluated task orderings."""

    orderings: List[Tuple[str, ...]]
    makespans: List[float]
    best_ordering: Tuple[str, ...]
    best: float
    worst: float
    median: float
    geomean: float
    exhaustive: bool  # False when the orderings were sampled under a cap


def make_report(
    orderings: Sequence[Tuple[str, ...]],
    makespans: Sequence[float],
    exhaustive: bool,
) -> PermutationReport:
    ms = np.asarray(makespans, dtype=float)
    best_idx = int(np.argmin(ms))
    return PermutationReport(
        orderings=list(orderings),
        makespans=[float(m) for m in ms],
        best_ordering=tuple(orderings[best_idx]),
        best=float(ms.min()),
        worst=float(ms.max()),
        median=float(np.median(ms)),
        geomean=float(np.exp(np.log(ms).mean())),
        exhaustive=exhaustive,
    )


def micro_simulate(
    tasks: Sequence[TaskSpec],
    profile: DeviceProfile,
    dt: float = DEFAULT_DT,
) -> Timeline:
    """Reference simulation with a fixed time step.

    Command start/end times are quantized to dt; while both DMA engines
    of a 2-DMA device are busy, each executing transfer consumes work at
    the profile's overlap rate instead of full rate.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    durations = [stage_times(t, profile) for t in tasks]
    t_htd = np.array([d[0] for d in durations])
    t_k = np.array([d[1] for d in durations])
    t_dth = np.array([d[2] for d in durations])
    starts, ends, makespan = micro_core(
        t_htd, t_k, t_dth, profile.dma_engines == 2, profile.overlap_sigma, dt
    )
    commands: List[Command] = []
    for stage, kind in ((0, engine.KIND_HTD), (1, engine.KIND_K), (2, engine.KIND_DTH)):
        for i, task in enumerate(tasks):
            if starts[stage, i] >= 0.0:
                commands.append(
                    Command(
                        task_id=task.id,
                        kind=kind,
                        nominal_duration=durations[i][stage],
                        start=float(starts[stage, i]),
                        end=float(ends[stage, i]),
                        remaining_work=0.0,
                    )
                )
    commands.sort(key=lambda c: (c.start, c.end, engine.KINDS.index(c.kind)))
    return Timeline(commands=commands, makespan=float(makespan), idle=idle_report(commands))


def _sample_permutations(n: int, cap: int, seed: int) -> List[Tuple[int, ...]]:
    """Distinct random permutations of range(n), seeded."""
    rng = np.random.default_rng(seed)
    seen = set()
    out: List[Tuple[int, ...]] = []
    while len(out) < cap:
        perm = tuple(int(x) for x in rng.permutation(n))
        if perm not in seen:
            seen.add(perm)
            out.append(perm)
    return out


def exhaustive_search(
    tasks: Sequence[TaskSpec],
    profile: DeviceProfile,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
) -> PermutationReport:
    """Makespan distribution over all (or up to ``cap`` sampled) orderings."""
    if not tasks:
        raise ValueError("task set must be non-empty")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    n = len(tasks)
    total = math.factorial(n)
    if total <= cap:
        perms: List[Tuple[int, ...]] = [tuple(p) for p in permutations(range(n))]
        exhaustive = True
    else:
        perms = _sample_permutations(n, cap, seed)
        exhaustive = False
    orderings = []
    makespans = []
    for perm in perms:
        ordered = [tasks[i] for i in perm]
        orderings.append(tuple(t.id for t in ordered))
        makespans.append(engine.simulate(ordered, profile).makespan)
    return make_report(orderings, makespans, exhaustive)
