"""Benchmark definitions and the multi-worker offload harness.

Ships the eight synthetic tasks and the five four-task benchmark
compositions used throughout, timing envelopes for eight well-known
accelerator kernels on three devices (for sampled "real" task sets), and
a harness that replays the proxy-thread protocol: workers feed dependent
task batches, the proxy groups available tasks, reorders each group and
submits it behind whatever is still running on the device.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .engine import DeviceSim, KIND_HTD, Timeline, simulate
from .heuristic import reorder_batch
from .model import DeviceProfile, OffsimError, TaskDominance, TaskSpec, classify_task
from .oracle import DEFAULT_CAP, PermutationReport, make_report


class UnknownBenchmark(OffsimError):
    pass


class CapExceeded(UserWarning):
    """Ordering space larger than the cap; distribution is sampled."""


TIME_UNIT_MS = 10.0

# Synthetic task stage times as fractions of the 10 ms unit.
_SYNTHETIC_FRACTIONS: Dict[str, Tuple[float, float, float]] = {
    "T0": (0.1, 0.8, 0.1),
    "T1": (0.2, 0.7, 0.1),
    "T2": (0.3, 0.6, 0.1),
    "T3": (0.1, 0.7, 0.2),
    "T4": (0.6, 0.2, 0.2),
    "T5": (0.2, 0.2, 0.6),
    "T6": (0.4, 0.2, 0.4),
    "T7": (0.8, 0.1, 0.1),
}

_BK_COMPOSITIONS: Dict[str, Tuple[str, ...]] = {
    "BK0": ("T6", "T7", "T4", "T5"),
    "BK25": ("T0", "T4", "T6", "T7"),
    "BK50": ("T0", "T1", "T4", "T5"),
    "BK75": ("T0", "T1", "T2", "T4"),
    "BK100": ("T0", "T1", "T2", "T3"),
}

BK_NAMES = tuple(_BK_COMPOSITIONS)

# Measured stage-time envelopes (min, max) in ms per kernel and device:
# ((htd), (kernel), (dth)).
REAL_TASK_RANGES: Dict[str, Dict[str, Tuple[Tuple[float, float], ...]]] = {
    "AMD": {
        "MM": ((0.97, 2.57), (1.80, 9.02), (0.14, 1.18)),
        "BS": ((0.08, 1.29), (2.98, 5.57), (0.16, 2.17)),
        "FWT": ((1.29, 2.57), (2.59, 5.47), (1.18, 2.35)),
        "FLW": ((0.05, 0.07), (7.77, 10.08), (0.09, 0.16)),
        "CONV": ((0.09, 0.37), (1.51, 14.58), (0.09, 0.37)),
        "VA": ((0.65, 3.86), (0.05, 0.30), (0.30, 1.81)),
        "TM": ((2.57, 5.15), (0.29, 3.59), (2.36, 4.70)),
        "DCT": ((2.57, 5.15), (0.95, 1.89), (2.35, 4.71)),
    },
    "PHI": {
        "MM": ((0.36, 0.90), (4.98, 5.03), (0.09, 0.16)),
        "BS": ((0.17, 0.63), (5.25, 12.03), (0.33, 1.24)),
        "FWT": ((0.67, 1.26), (4.59, 6.39), (0.61, 1.21)),
        "FLW": ((0.03, 0.06), (1.12, 9.05), (0.06, 0.12)),
        "CONV": ((0.06, 0.17), (0.56, 10.09), (0.17, 10.09)),
        "VA": ((1.27, 7.46), (0.18, 1.18), (0.61, 3.68)),
        "TM": ((2.58, 4.98), (1.09, 2.36), (2.54, 4.93)),
        "DCT": ((1.71, 2.25), (6.97, 9.41), (1.67, 2.18)),
    },
    "K20": {
        "MM": ((2.51, 3.77), (3.99, 7.95), (1.24, 2.49)),
        "BS": ((0.31, 1.25), (1.25, 9.26), (0.62, 2.50)),
        "FWT": ((1.25, 5.01), (1.20, 4.94), (1.25, 4.98)),
        "FLW": ((0.01, 0.31), (1.32, 9.25), (0.03, 0.63)),
        "CONV": ((0.63, 2.53), (1.47, 9.20), (0.62, 2.50)),
        "VA": ((2.51, 12.54), (0.09, 0.44), (1.25, 6.19)),
        "TM": ((2.60, 5.01), (0.41, 2.61), (2.60, 4.96)),
        "DCT": ((2.51, 5.01), (1.55, 3.08), (2.48, 4.96)),
    },
}


@dataclass(frozen=True)
class Benchmark:
    name: str
    tasks: Tuple[TaskSpec, ...]
    dk_fraction: float


@dataclass(frozen=True)
class Scenario:
    """T workers, each submitting a batch of N dependent tasks."""

    workers: int
    batch_depth: int
    pool: Benchmark
    seed: int
    profile: DeviceProfile

    def __post_init__(self):
        if self.workers < 1 or self.batch_depth < 1:
            raise ValueError("workers and batch_depth must be at least 1")


@dataclass
class ScenarioResult:
    heuristic_makespan: float
    timeline: Timeline
    tg_sizes: List[int]
    scheduling_overhead_ms: float  # mean wall-clock time per reorder call
    noreorder: Optional[PermutationReport]
    speedup_heuristic: Optional[float]  # vs worst NoReorder ordering
    speedup_median: Optional[float]
    speedup_best: Optional[float]


def load_table2_tasks() -> List[TaskSpec]:
    """The eight synthetic tasks, with fractions scaled to milliseconds."""
    return [
        TaskSpec(id=name, fixed_durations=tuple(f * TIME_UNIT_MS for f in fractions))
        for name, fractions in _SYNTHETIC_FRACTIONS.items()
    ]


def make_benchmark(name: str, tasks: Sequence[TaskSpec]) -> Benchmark:
    dk = sum(
        1 for t in tasks if classify_task(t) is TaskDominance.DOMINANT_KERNEL
    )
    return Benchmark(name=name, tasks=tuple(tasks), dk_fraction=dk / len(tasks))


def load_bk_benchmark(name: str) -> Benchmark:
    """One of the five bundled four-task benchmarks (BK0 .. BK100)."""
    if name not in _BK_COMPOSITIONS:
        raise UnknownBenchmark(f"unknown benchmark {name!r}; expected one of {BK_NAMES}")
    by_id = {t.id: t for t in load_table2_tasks()}
    return make_benchmark(name, [by_id[tid] for tid in _BK_COMPOSITIONS[name]])


def sample_real_tasks(device: str, count: int, seed: int) -> List[TaskSpec]:
    """Tasks drawn from the measured kernel envelopes of one device.

    Each task picks a kernel uniformly, then draws every stage duration
    uniformly within that kernel's (min, max) range.
    """
    if device not in REAL_TASK_RANGES:
        raise ValueError(f"unknown device {device!r}; expected one of {tuple(REAL_TASK_RANGES)}")
    if count < 1:
        raise ValueError("count must be at least 1")
    ranges = REAL_TASK_RANGES[device]
    kernels = sorted(ranges)
    rng = np.random.default_rng(seed)
    tasks = []
    for i in range(count):
        kernel = kernels[int(rng.integers(len(kernels)))]
        (h_lo, h_hi), (k_lo, k_hi), (d_lo, d_hi) = ranges[kernel]
        tasks.append(
            TaskSpec(
                id=f"{kernel}-{i}",
                fixed_durations=(
                    float(rng.uniform(h_lo, h_hi)),
                    float(rng.uniform(k_lo, k_hi)),
                    float(rng.uniform(d_lo, d_hi)),
                ),
            )
        )
    return tasks


# -- multi-worker harness ---------------------------------------------


def _draw_worker_tasks(scenario: Scenario) -> List[List[TaskSpec]]:
    rng = np.random.default_rng(scenario.seed)
    pool = scenario.pool.tasks
    return [
        [
            replace(pool[int(rng.integers(len(pool)))], id=f"w{w}.{j}")
            for j in range(scenario.batch_depth)
        ]
        for w in range(scenario.workers)
    ]


def _run_heuristic_schedule(
    scenario: Scenario, worker_tasks: List[List[TaskSpec]]
) -> Tuple[Timeline, List[int], float]:
    """Replay the proxy protocol on an incrementally fed device simulator.

    A worker's next task becomes available when its previous task fully
    completes; a new group is formed from all available tasks at the
    first instant after the last HtD of the current group has gone
    through the DMA engine.
    """
    profile = scenario.profile
    sim = DeviceSim(profile)
    next_idx = [0] * scenario.workers
    owner = {
        t.id: (w, j)
        for w, batch in enumerate(worker_tasks)
        for j, t in enumerate(batch)
    }
    available = list(range(scenario.workers))
    polling = True
    watched_htd = None
    tg_sizes: List[int] = []
    overhead = 0.0

    def submit_group():
        nonlocal polling, watched_htd, overhead
        tg = [worker_tasks[w][next_idx[w]] for w in sorted(available)]
        for w in available:
            next_idx[w] += 1
        available.clear()
        t0 = time.perf_counter()
        ordered = reorder_batch(tg, profile)
        overhead += time.perf_counter() - t0
        commands = sim.submit(ordered)
        tg_sizes.append(len(tg))
        htds = [c for c in commands if c.kind == KIND_HTD]
        watched_htd = htds[-1] if htds else None
        polling = watched_htd is None

    remaining = lambda: any(
        next_idx[w] < scenario.batch_depth for w in range(scenario.workers)
    )

    submit_group()
    while True:
        if polling and available:
            submit_group()
        finalized = sim.step()
        if finalized is None:
            if remaining() or not sim.drained():
                raise RuntimeError("harness stalled with tasks remaining")
            break
        for cmd in finalized:
            if cmd is watched_htd:
                polling = True
            if sim.task_finished(cmd.task_id):
                w, j = owner[cmd.task_id]
                if j + 1 < scenario.batch_depth:
                    available.append(w)
    return sim.timeline(), tg_sizes, overhead / max(len(tg_sizes), 1)


def _interleavings(scenario: Scenario, cap: int) -> Tuple[List[Tuple[int, ...]], bool]:
    """Worker-label sequences respecting intra-worker order."""
    t, n = scenario.workers, scenario.batch_depth
    labels = [w for w in range(t) for _ in range(n)]
    total = math.factorial(t * n) // math.factorial(n) ** t
    if total <= cap:
        return sorted(set(permutations(labels))), True
    rng = np.random.default_rng(scenario.seed)
    seen = set()
    out: List[Tuple[int, ...]] = []
    while len(out) < cap:
        seq = tuple(int(x) for x in rng.permutation(labels))
        if seq not in seen:
            seen.add(seq)
            out.append(seq)
    return out, False


def simulate_sequence(
    seq: Sequence[TaskSpec],
    profile: DeviceProfile,
    deps: Optional[Dict[str, str]] = None,
) -> Timeline:
    """Simulate one whole task sequence with optional task dependencies.

    On a 1-DMA device the sequence is split into waves (a task whose
    prerequisite sits in the current wave opens a new one) so that the
    HtD-before-DtH launch grouping never deadlocks against a dependency.
    """
    deps = deps or {}
    if profile.dma_engines == 2 or not deps:
        return simulate(list(seq), profile, deps=deps or None)
    sim = DeviceSim(profile)
    wave: List[TaskSpec] = []
    wave_ids: set = set()
    for task in seq:
        dep = deps.get(task.id)
        if dep is not None and dep in wave_ids:
            sim.submit(wave, deps)
            wave, wave_ids = [], set()
        wave.append(task)
        wave_ids.add(task.id)
    if wave:
        sim.submit(wave, deps)
    sim.run()
    return sim.timeline()


def noreorder_distribution(
    scenario: Scenario, worker_tasks: List[List[TaskSpec]], cap: int
) -> PermutationReport:
    """Makespans of whole-sequence orderings that keep intra-worker order."""
    deps = {
        worker_tasks[w][j].id: worker_tasks[w][j - 1].id
        for w in range(scenario.workers)
        for j in range(1, scenario.batch_depth)
    }
    seqs, exhaustive = _interleavings(scenario, cap)
    orderings = []
    makespans = []
    for label_seq in seqs:
        counters = [0] * scenario.workers
        tasks = []
        for w in label_seq:
            tasks.append(worker_tasks[w][counters[w]])
            counters[w] += 1
        orderings.append(tuple(t.id for t in tasks))
        makespans.append(simulate_sequence(tasks, scenario.profile, deps).makespan)
    return make_report(orderings, makespans, exhaustive)


def run_scenario(
    scenario: Scenario,
    evaluate_noreorder: bool = True,
    cap: int = DEFAULT_CAP,
) -> ScenarioResult:
    """Run the heuristic harness and, optionally, the NoReorder baseline."""
    worker_tasks = _draw_worker_tasks(scenario)
    timeline, tg_sizes, overhead = _run_heuristic_schedule(scenario, worker_tasks)
    result = ScenarioResult(
        heuristic_makespan=timeline.makespan,
        timeline=timeline,
        tg_sizes=tg_sizes,
        scheduling_overhead_ms=overhead * 1e3,
        noreorder=None,
        speedup_heuristic=None,
        speedup_median=None,
        speedup_best=None,
    )
    if evaluate_noreorder:
        report = noreorder_distribution(scenario, worker_tasks, cap)
        if not report.exhaustive:
            import warnings

            warnings.warn(
                f"ordering space exceeds cap={cap}; NoReorder distribution is sampled",
                CapExceeded,
                stacklevel=2,
            )
        result.noreorder = report
        result.speedup_heuristic = report.worst / timeline.makespan
        result.speedup_median = report.worst / report.median
        result.speedup_best = report.worst / report.best
    return result
