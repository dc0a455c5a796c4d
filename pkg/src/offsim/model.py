"""Domain types and closed-form time estimators for offloaded task commands.

A task is the ordered stage triple HtD -> K -> DtH.  Transfer stages may
be null (zero bytes / zero milliseconds), in which case no command exists
for them.  All times are milliseconds; sizes are bytes (1 MB = 1e6 bytes).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

MB = 1e6


class Direction(Enum):
    HTD = "HtD"
    DTH = "DtH"


class TaskDominance(Enum):
    DOMINANT_KERNEL = "DK"
    DOMINANT_TRANSFER = "DT"


class OffsimError(Exception):
    """Base class for offsim errors."""


class InsufficientSamples(OffsimError):
    """Fewer than two distinct work sizes given to the kernel-model fit."""


class UnresolvableDuration(OffsimError):
    """A task has neither fixed durations nor usable estimator inputs."""


class NegativeFitWarning(UserWarning):
    """Fitted kernel-model parameter came out negative."""


@dataclass(frozen=True)
class DeviceProfile:
    """Transfer/overlap characteristics of one accelerator.

    ``overlap_sigma`` is the bandwidth degradation factor applied to both
    transfer directions while both DMA engines are busy; it is only
    meaningful when ``dma_engines == 2``.
    """

    name: str
    dma_engines: int
    htd_latency_ms: float
    htd_bandwidth: float  # bytes per ms
    dth_latency_ms: float
    dth_bandwidth: float  # bytes per ms
    overlap_sigma: float = 1.0

    def __post_init__(self):
        if self.dma_engines not in (1, 2):
            raise ValueError(f"dma_engines must be 1 or 2, got {self.dma_engines}")
        if self.htd_bandwidth <= 0 or self.dth_bandwidth <= 0:
            raise ValueError("bandwidths must be positive")
        if self.htd_latency_ms < 0 or self.dth_latency_ms < 0:
            raise ValueError("latencies must be non-negative")
        if not (0.0 < self.overlap_sigma <= 1.0):
            raise ValueError("overlap_sigma must be in (0, 1]")


@dataclass(frozen=True)
class TaskSpec:
    """One offloadable task.

    Stage durations come either from ``fixed_durations`` (t_htd, t_k,
    t_dth in ms) or from the transfer/kernel estimators applied to the
    size fields.
    """

    id: str
    htd_bytes: float = 0.0
    kernel_work: float = 0.0
    eta: float = 0.0
    gamma: float = 0.0
    dth_bytes: float = 0.0
    fixed_durations: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        for field in ("htd_bytes", "kernel_work", "eta", "gamma", "dth_bytes"):
            if getattr(self, field) < 0:
                raise ValueError(f"{field} must be non-negative")
        if self.fixed_durations is not None:
            t_htd, t_k, t_dth = self.fixed_durations
            if min(t_htd, t_k, t_dth) < 0:
                raise ValueError("fixed durations must be non-negative")
            if t_htd + t_dth <= 0 and t_k <= 0:
                raise ValueError("task must have at least one positive stage")


def estimate_transfer(n_bytes: float, direction: Direction, profile: DeviceProfile) -> float:
    """Transfer time in ms: latency + bytes / bandwidth; 0 for a null stage."""
    if n_bytes == 0:
        return 0.0
    if direction is Direction.HTD:
        return profile.htd_latency_ms + n_bytes / profile.htd_bandwidth
    return profile.dth_latency_ms + n_bytes / profile.dth_bandwidth


def estimate_kernel(work: float, eta: float, gamma: float) -> float:
    """Kernel time in ms: computing rate times work plus invocation latency."""
    return eta * work + gamma


def fit_kernel_model(samples: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares fit of (eta, gamma) from (work, time) measurements.

    Warns with :class:`NegativeFitWarning` when a fitted parameter is
    negative; the fit is still returned.
    """
    if len(samples) < 2 or len({w for w, _ in samples}) < 2:
        raise InsufficientSamples("need at least 2 samples with distinct work sizes")
    work = np.asarray([w for w, _ in samples], dtype=float)
    time = np.asarray([t for _, t in samples], dtype=float)
    eta, gamma = np.polyfit(work, time, 1)
    # Ignore negatives at rounding-noise scale relative to the data.
    tol = -1e-9 * max(1.0, float(np.max(np.abs(time))))
    if eta < tol or gamma < tol:
        warnings.warn(
            f"fitted kernel model has a negative parameter (eta={eta:.4g}, gamma={gamma:.4g})",
            NegativeFitWarning,
            stacklevel=2,
        )
    return float(eta), float(gamma)


def stage_times(task: TaskSpec, profile: Optional[DeviceProfile] = None) -> Tuple[float, float, float]:
    """Resolve (t_htd, t_k, t_dth) in ms for a task.

    Fixed durations take precedence; otherwise the estimators are applied,
    which requires a profile when a transfer stage is non-null.
    """
    if task.fixed_durations is not None:
        return task.fixed_durations
    t_k = estimate_kernel(task.kernel_work, task.eta, task.gamma)
    if task.htd_bytes == 0 and task.dth_bytes == 0:
        if t_k <= 0:
            raise UnresolvableDuration(f"task {task.id!r} has no resolvable stage")
        return (0.0, t_k, 0.0)
    if profile is None:
        raise UnresolvableDuration(
            f"task {task.id!r} needs a device profile to resolve transfer times"
        )
    t_htd = estimate_transfer(task.htd_bytes, Direction.HTD, profile)
    t_dth = estimate_transfer(task.dth_bytes, Direction.DTH, profile)
    if t_htd + t_dth <= 0 and t_k <= 0:
        raise UnresolvableDuration(f"task {task.id!r} has no resolvable stage")
    return (t_htd, t_k, t_dth)


def classify_task(task: TaskSpec, profile: Optional[DeviceProfile] = None) -> TaskDominance:
    """DT when transfer stages outweigh the kernel stage, DK otherwise.

    The boundary t_htd + t_dth == t_k classifies as dominant kernel.
    """
    t_htd, t_k, t_dth = stage_times(task, profile)
    if t_htd + t_dth > t_k:
        return TaskDominance.DOMINANT_TRANSFER
    return TaskDominance.DOMINANT_KERNEL
