from itertools import permutations

import pytest

from offsim.engine import simulate
from offsim.model import DeviceProfile, TaskSpec
from offsim.oracle import exhaustive_search, micro_simulate
from offsim.workload import load_bk_benchmark

DT = 0.001


class TestMicroSimulate:
    def test_single_task(self, two_dma, synthetic):
        tl = micro_simulate([synthetic["T0"]], two_dma, dt=DT)
        assert tl.makespan == pytest.approx(10.0, abs=DT)

    def test_full_overlap_closed_form(self):
        profile = DeviceProfile("s5", 2, 0.0, 1.0, 0.0, 1.0, overlap_sigma=0.5)
        tasks = [
            TaskSpec(id="out", fixed_durations=(0.0, 0.0, 10.0)),
            TaskSpec(id="in", fixed_durations=(10.0, 0.0, 0.0)),
        ]
        tl = micro_simulate(tasks, profile, dt=DT)
        assert tl.makespan == pytest.approx(20.0, abs=DT)
        for c in tl.commands:
            assert c.end == pytest.approx(20.0, abs=DT)

    def test_rejects_nonpositive_dt(self, two_dma, synthetic):
        with pytest.raises(ValueError):
            micro_simulate([synthetic["T0"]], two_dma, dt=0.0)

    @pytest.mark.parametrize("name", ["BK0", "BK50", "BK100"])
    @pytest.mark.parametrize("profile_name", ["one_dma", "two_dma"])
    def test_agrees_with_engine(self, name, profile_name, request):
        profile = request.getfixturevalue(profile_name)
        tasks = list(load_bk_benchmark(name).tasks)
        for perm in permutations(tasks):
            engine_ms = simulate(list(perm), profile).makespan
            micro_ms = micro_simulate(list(perm), profile, dt=DT).makespan
            assert abs(engine_ms - micro_ms) <= 2 * DT

    def test_convergence_under_dt_halving(self, two_dma):
        tasks = list(load_bk_benchmark("BK25").tasks)
        coarse = micro_simulate(tasks, two_dma, dt=0.01).makespan
        fine = micro_simulate(tasks, two_dma, dt=0.005).makespan
        assert abs(coarse - fine) <= 0.01


class TestExhaustiveSearch:
    def test_four_tasks_full_sweep(self, two_dma):
        tasks = list(load_bk_benchmark("BK50").tasks)
        report = exhaustive_search(tasks, two_dma)
        assert len(report.makespans) == 24
        assert report.exhaustive

    def test_singleton(self, two_dma, synthetic):
        report = exhaustive_search([synthetic["T3"]], two_dma)
        assert len(report.makespans) == 1
        assert report.best == report.worst

    def test_best_verified_by_resimulation(self, two_dma):
        tasks = list(load_bk_benchmark("BK50").tasks)
        report = exhaustive_search(tasks, two_dma)
        by_id = {t.id: t for t in tasks}
        best = simulate([by_id[i] for i in report.best_ordering], two_dma).makespan
        assert best == pytest.approx(report.best)
        assert all(best <= m + 1e-9 for m in report.makespans)

    def test_report_order_statistics(self, two_dma):
        tasks = list(load_bk_benchmark("BK25").tasks)
        report = exhaustive_search(tasks, two_dma)
        assert report.best <= report.median <= report.worst
        assert report.best <= report.geomean <= report.worst

    def test_homogeneous_sets_are_symmetric(self, two_dma, synthetic):
        clones = [
            TaskSpec(id=f"c{i}", fixed_durations=synthetic["T4"].fixed_durations)
            for i in range(4)
        ]
        report = exhaustive_search(clones, two_dma)
        assert report.best == pytest.approx(report.worst)

    def test_sampling_is_seeded(self, two_dma, synthetic):
        tasks = [
            TaskSpec(id=f"t{i}", fixed_durations=(0.5 + 0.1 * i, 2.0, 0.5))
            for i in range(6)
        ]
        a = exhaustive_search(tasks, two_dma, cap=50, seed=9)
        b = exhaustive_search(tasks, two_dma, cap=50, seed=9)
        assert not a.exhaustive
        assert a.orderings == b.orderings
        assert a.makespans == b.makespans
