"""offsim: makespan prediction and batch reordering for accelerator offload."""

from .engine import Command, DeviceSim, Timeline, recompute_overlap, simulate
from .heuristic import reorder_batch
from .model import (
    DeviceProfile,
    Direction,
    TaskDominance,
    TaskSpec,
    classify_task,
    estimate_kernel,
    estimate_transfer,
    fit_kernel_model,
    stage_times,
)
from .oracle import PermutationReport, exhaustive_search, micro_simulate
from .workload import (
    Benchmark,
    Scenario,
    ScenarioResult,
    load_bk_benchmark,
    load_table2_tasks,
    run_scenario,
    sample_real_tasks,
)

__version__ = "0.1.0"

__all__ = [
    "Benchmark",
    "Command",
    "DeviceProfile",
    "DeviceSim",
    "Direction",
    "PermutationReport",
    "Scenario",
    "ScenarioResult",
    "TaskDominance",
    "TaskSpec",
    "Timeline",
    "classify_task",
    "estimate_kernel",
    "estimate_transfer",
    "exhaustive_search",
    "fit_kernel_model",
    "load_bk_benchmark",
    "load_table2_tasks",
    "micro_simulate",
    "recompute_overlap",
    "reorder_batch",
    "run_scenario",
    "sample_real_tasks",
    "simulate",
    "stage_times",
]
