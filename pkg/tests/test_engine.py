from itertools import permutations

import pytest

from offsim.engine import (
    Command,
    KIND_DTH,
    KIND_HTD,
    KIND_K,
    recompute_overlap,
    simulate,
)
from offsim.model import DeviceProfile, TaskSpec
from offsim.workload import BK_NAMES, load_bk_benchmark


def cmd_map(timeline):
    return {(c.task_id, c.kind): (c.start, c.end) for c in timeline.commands}


class TestSimulateBasics:
    def test_single_task_chain(self, two_dma, synthetic):
        tl = simulate([synthetic["T0"]], two_dma)
        assert tl.makespan == pytest.approx(10.0)
        assert cmd_map(tl) == {
            ("T0", KIND_HTD): (0.0, 1.0),
            ("T0", KIND_K): (1.0, 9.0),
            ("T0", KIND_DTH): (9.0, 10.0),
        }

    def test_two_copies_serialize_kernels(self, synthetic):
        profile = DeviceProfile("sigma1", 2, 0.0, 1.0, 0.0, 1.0, overlap_sigma=1.0)
        twin = TaskSpec(id="T0b", fixed_durations=(1.0, 8.0, 1.0))
        tl = simulate([synthetic["T0"], twin], profile)
        assert tl.makespan == pytest.approx(18.0)
        assert cmd_map(tl) == {
            ("T0", KIND_HTD): (0.0, 1.0),
            ("T0b", KIND_HTD): (1.0, 2.0),
            ("T0", KIND_K): (1.0, 9.0),
            ("T0b", KIND_K): (9.0, 17.0),
            ("T0", KIND_DTH): (9.0, 10.0),
            ("T0b", KIND_DTH): (17.0, 18.0),
        }

    def test_null_stages_produce_no_commands(self, two_dma):
        task = TaskSpec(id="k-only", fixed_durations=(0.0, 5.0, 0.0))
        tl = simulate([task], two_dma)
        assert [c.kind for c in tl.commands] == [KIND_K]
        assert tl.makespan == pytest.approx(5.0)

    def test_empty_group_rejected(self, two_dma):
        with pytest.raises(ValueError):
            simulate([], two_dma)

    def test_overlap_stretches_both_transfers(self):
        # Two opposite transfers overlapping in full at sigma=0.5 both
        # take twice their nominal time.
        profile = DeviceProfile("s5", 2, 0.0, 1.0, 0.0, 1.0, overlap_sigma=0.5)
        # "out" has no HtD/K so its DtH starts at 0, alongside "in"'s HtD.
        tasks = [
            TaskSpec(id="out", fixed_durations=(0.0, 0.0, 10.0)),
            TaskSpec(id="in", fixed_durations=(10.0, 0.0, 0.0)),
        ]
        tl = simulate(tasks, profile)
        times = cmd_map(tl)
        assert times[("out", KIND_DTH)][1] == pytest.approx(20.0)
        assert times[("in", KIND_HTD)][1] == pytest.approx(20.0)


class TestRecomputeOverlap:
    def test_remaining_work_stretched(self):
        profile = DeviceProfile("fig", 2, 0.0, 1.0, 0.0, 1.0, overlap_sigma=0.375)
        htd = Command("t1", KIND_HTD, 10.0, start=200.0, remaining_work=0.3)
        dth = Command("t0", KIND_DTH, 13.0, start=207.0, remaining_work=1.0)
        new_htd, _ = recompute_overlap(htd, dth, 207.0, profile)
        assert new_htd == pytest.approx(215.0)

    def test_sigma_one_is_identity(self):
        profile = DeviceProfile("id", 2, 0.0, 1.0, 0.0, 1.0, overlap_sigma=1.0)
        htd = Command("a", KIND_HTD, 4.0, start=0.0, remaining_work=0.5)
        dth = Command("b", KIND_DTH, 6.0, start=1.0, remaining_work=1.0)
        new_htd, new_dth = recompute_overlap(htd, dth, 2.0, profile)
        assert new_htd == pytest.approx(4.0)
        assert new_dth == pytest.approx(8.0)

    def test_equal_full_overlap(self):
        profile = DeviceProfile("s5", 2, 0.0, 1.0, 0.0, 1.0, overlap_sigma=0.5)
        htd = Command("a", KIND_HTD, 10.0, start=0.0, remaining_work=1.0)
        dth = Command("b", KIND_DTH, 10.0, start=0.0, remaining_work=1.0)
        assert recompute_overlap(htd, dth, 0.0, profile) == (
            pytest.approx(20.0),
            pytest.approx(20.0),
        )


@pytest.mark.parametrize("name", BK_NAMES)
class TestStructuralInvariants:
    def _timelines(self, name, profile):
        tasks = list(load_bk_benchmark(name).tasks)
        for perm in permutations(tasks):
            yield simulate(list(perm), profile)

    def test_dependency_soundness(self, name, two_dma):
        for tl in self._timelines(name, two_dma):
            times = cmd_map(tl)
            for task_id in {c.task_id for c in tl.commands}:
                assert times[(task_id, KIND_K)][0] >= times[(task_id, KIND_HTD)][1]
                assert times[(task_id, KIND_DTH)][0] >= times[(task_id, KIND_K)][1]

    def test_fifo_order_per_queue(self, name, two_dma):
        for tl in self._timelines(name, two_dma):
            for kind in (KIND_HTD, KIND_K, KIND_DTH):
                ends = [c.end for c in tl.commands_of_kind(kind)]
                starts = [c.start for c in tl.commands_of_kind(kind)]
                assert ends == sorted(ends)
                assert starts == sorted(starts)

    def test_kernels_never_overlap(self, name, two_dma):
        for tl in self._timelines(name, two_dma):
            kernels = tl.commands_of_kind(KIND_K)
            for a, b in zip(kernels, kernels[1:]):
                assert b.start >= a.end - 1e-9

    def test_one_dma_transfers_disjoint(self, name, one_dma):
        for tl in self._timelines(name, one_dma):
            transfers = sorted(
                (c for c in tl.commands if c.kind != KIND_K), key=lambda c: c.start
            )
            for a, b in zip(transfers, transfers[1:]):
                assert b.start >= a.end - 1e-9
            first_dth = min(c.start for c in tl.commands_of_kind(KIND_DTH))
            last_htd = max(c.end for c in tl.commands_of_kind(KIND_HTD))
            assert first_dth >= last_htd - 1e-9

    def test_makespan_bounds(self, name, two_dma):
        tasks = list(load_bk_benchmark(name).tasks)
        serial = sum(sum(t.fixed_durations) for t in tasks)
        critical = max(sum(t.fixed_durations) for t in tasks)
        for tl in self._timelines(name, two_dma):
            assert critical - 1e-9 <= tl.makespan <= serial + 1e-9

    def test_work_conservation_without_degradation(self, name):
        profile = DeviceProfile("s1", 2, 0.0, 1.0, 0.0, 1.0, overlap_sigma=1.0)
        for tl in self._timelines(name, profile):
            for c in tl.commands:
                assert c.end - c.start == pytest.approx(c.nominal_duration)

    def test_determinism(self, name, two_dma):
        tasks = list(load_bk_benchmark(name).tasks)
        a = simulate(tasks, two_dma)
        b = simulate(tasks, two_dma)
        assert cmd_map(a) == cmd_map(b)
        assert a.makespan == b.makespan
