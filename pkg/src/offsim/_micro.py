"""Fixed-timestep reference core for the micro simulator.

The tick loop is the hot path of validation sweeps (tens of millions of
ticks at the default 1 us step), so it is compiled with numba when
available.  Setting the environment variable ``OFFSIM_DISABLE_NUMBA`` to
any non-empty value selects the interpreted fallback, which runs the
identical code path; ``benchmarks/bench_micro.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_TOL = 1e-9  # ms of remaining work treated as zero


def _micro_core(t_htd, t_k, t_dth, dma2, sigma, dt):
    """Advance a global clock in dt increments until all commands drain.

    Stage index convention: 0 = HtD, 1 = K, 2 = DtH.  Returns per-stage
    start/end arrays (-1 where no command exists) and the makespan.
    """
    n = t_htd.shape[0]

    n_h = 0
    n_d = 0
    n_k = 0
    for i in range(n):
        if t_htd[i] > 0.0:
            n_h += 1
        if t_dth[i] > 0.0:
            n_d += 1
        if t_k[i] > 0.0:
            n_k += 1

    # Transfer queues: separate per direction on a 2-DMA device, one
    # shared queue (all HtD before all DtH) on a 1-DMA device.
    q_h = np.empty(n_h, np.int64)
    q_d = np.empty(n_d, np.int64)
    q_k = np.empty(n_k, np.int64)
    j = 0
    for i in range(n):
        if t_htd[i] > 0.0:
            q_h[j] = i
            j += 1
    j = 0
    for i in range(n):
        if t_dth[i] > 0.0:
            q_d[j] = i
            j += 1
    j = 0
    for i in range(n):
        if t_k[i] > 0.0:
            q_k[j] = i
            j += 1

    rem = np.empty((3, n))
    done = np.zeros((3, n), np.uint8)
    starts = np.full((3, n), -1.0)
    ends = np.full((3, n), -1.0)
    for i in range(n):
        rem[0, i] = t_htd[i]
        rem[1, i] = t_k[i]
        rem[2, i] = t_dth[i]
        if t_htd[i] <= 0.0:
            done[0, i] = 1
        if t_k[i] <= 0.0:
            done[1, i] = 1
        if t_dth[i] <= 0.0:
            done[2, i] = 1

    h_h = 0
    h_d = 0
    h_k = 0
    t = 0.0
    step = 0
    makespan = 0.0
    while True:
        # Pick the executing command per resource: only queue heads whose
        # dependencies are satisfied may run.
        e_h = -1
        e_d = -1
        if dma2:
            if h_h < n_h:
                e_h = q_h[h_h]
            if h_d < n_d:
                i = q_d[h_d]
                if done[1, i] == 1 and done[0, i] == 1:
                    e_d = i
        else:
            # One shared DMA engine: DtH commands only run once every HtD
            # of the group has drained.
            if h_h < n_h:
                e_h = q_h[h_h]
            elif h_d < n_d:
                i = q_d[h_d]
                if done[1, i] == 1 and done[0, i] == 1:
                    e_d = i
        e_k = -1
        if h_k < n_k:
            i = q_k[h_k]
            if done[0, i] == 1:
                e_k = i

        if e_h < 0 and e_d < 0 and e_k < 0:
            break

        rate = sigma if (dma2 and e_h >= 0 and e_d >= 0) else 1.0
        step += 1
        tick_end = step * dt
        if e_h >= 0:
            if starts[0, e_h] < 0.0:
                starts[0, e_h] = t
            rem[0, e_h] -= dt * rate
        if e_d >= 0:
            if starts[2, e_d] < 0.0:
                starts[2, e_d] = t
            rem[2, e_d] -= dt * rate
        if e_k >= 0:
            if starts[1, e_k] < 0.0:
                starts[1, e_k] = t
            rem[1, e_k] -= dt
        t = tick_end

        if e_h >= 0 and rem[0, e_h] <= _TOL:
            ends[0, e_h] = t
            done[0, e_h] = 1
            h_h += 1
            makespan = t
        if e_d >= 0 and rem[2, e_d] <= _TOL:
            ends[2, e_d] = t
            done[2, e_d] = 1
            h_d += 1
            makespan = t
        if e_k >= 0 and rem[1, e_k] <= _TOL:
            ends[1, e_k] = t
            done[1, e_k] = 1
            h_k += 1
            makespan = t

    return starts, ends, makespan


_micro_core_py = _micro_core

try:
    from numba import njit

    _micro_core_nb = njit(cache=True)(_micro_core)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _micro_core_nb = None
    HAVE_NUMBA = False


def use_numba() -> bool:
    return HAVE_NUMBA and not os.environ.get("OFFSIM_DISABLE_NUMBA")


def micro_core(t_htd, t_k, t_dth, dma2: bool, sigma: float, dt: float):
    t_htd = np.ascontiguousarray(t_htd, dtype=np.float64)
    t_k = np.ascontiguousarray(t_k, dtype=np.float64)
    t_dth = np.ascontiguousarray(t_dth, dtype=np.float64)
    core = _micro_core_nb if use_numba() else _micro_core_py
    return core(t_htd, t_k, t_dth, dma2, sigma, dt)
