import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from offsim.model import (
    MB,
    DeviceProfile,
    Direction,
    InsufficientSamples,
    NegativeFitWarning,
    TaskDominance,
    TaskSpec,
    UnresolvableDuration,
    classify_task,
    estimate_kernel,
    estimate_transfer,
    fit_kernel_model,
    stage_times,
)


def make_profile(**overrides):
    defaults = dict(
        name="test",
        dma_engines=2,
        htd_latency_ms=0.1,
        htd_bandwidth=8 * MB,
        dth_latency_ms=0.1,
        dth_bandwidth=4 * MB,
        overlap_sigma=0.5,
    )
    defaults.update(overrides)
    return DeviceProfile(**defaults)


class TestEstimateTransfer:
    def test_null_stage_is_free(self):
        assert estimate_transfer(0, Direction.HTD, make_profile()) == 0.0

    def test_htd_formula(self):
        assert estimate_transfer(8 * MB, Direction.HTD, make_profile()) == pytest.approx(1.1)

    def test_dth_formula(self):
        assert estimate_transfer(8 * MB, Direction.DTH, make_profile()) == pytest.approx(2.1)

    @given(st.floats(min_value=1.0, max_value=1e9), st.floats(min_value=1.0, max_value=1e9))
    def test_strictly_increasing_in_bytes(self, a, delta):
        profile = make_profile()
        assert estimate_transfer(a + delta, Direction.HTD, profile) > estimate_transfer(
            a, Direction.HTD, profile
        )

    @given(st.floats(min_value=1.0, max_value=1e9))
    def test_homogeneous_at_zero_latency(self, n_bytes):
        profile = make_profile(htd_latency_ms=0.0)
        single = estimate_transfer(n_bytes, Direction.HTD, profile)
        double = estimate_transfer(2 * n_bytes, Direction.HTD, profile)
        assert double == pytest.approx(2 * single)


class TestEstimateKernel:
    def test_formula(self):
        assert estimate_kernel(4, 2.0, 0.5) == pytest.approx(8.5)

    def test_zero_work_pays_latency(self):
        assert estimate_kernel(0, 3.0, 0.7) == pytest.approx(0.7)

    def test_degenerate_zero(self):
        assert estimate_kernel(123.0, 0.0, 0.0) == 0.0

    @given(
        st.floats(min_value=0, max_value=1e6),
        st.floats(min_value=0, max_value=1e6),
        st.floats(min_value=0, max_value=10),
        st.floats(min_value=0, max_value=10),
    )
    def test_affine(self, a, b, eta, gamma):
        lhs = estimate_kernel(a + b, eta, gamma) + gamma
        rhs = estimate_kernel(a, eta, gamma) + estimate_kernel(b, eta, gamma)
        assert lhs == pytest.approx(rhs, abs=1e-6)


class TestFitKernelModel:
    def test_exact_linear_data(self):
        eta, gamma = fit_kernel_model([(1, 2.5), (2, 4.5), (3, 6.5)])
        assert eta == pytest.approx(2.0, rel=1e-9)
        assert gamma == pytest.approx(0.5, rel=1e-9)

    def test_constant_time_kernel(self):
        eta, gamma = fit_kernel_model([(1, 5.0), (2, 5.0)])
        assert eta == pytest.approx(0.0, abs=1e-12)
        assert gamma == pytest.approx(5.0)

    def test_noisy_samples_recover_eta(self):
        rng = np.random.default_rng(1234)
        work = np.linspace(1, 10, 50)
        samples = [(m, 2.0 * m + 0.5 + rng.uniform(-0.01, 0.01)) for m in work]
        eta, _ = fit_kernel_model(samples)
        assert abs(eta - 2.0) < 0.05

    def test_rejects_single_work_size(self):
        with pytest.raises(InsufficientSamples):
            fit_kernel_model([(1, 2.0), (1, 2.1)])

    def test_negative_fit_warns(self):
        with pytest.warns(NegativeFitWarning):
            fit_kernel_model([(1, 5.0), (2, 3.0)])

    @given(
        st.floats(min_value=0.001, max_value=100),
        st.floats(min_value=0.0, max_value=100),
    )
    def test_roundtrip_identity(self, eta, gamma):
        samples = [(m, estimate_kernel(m, eta, gamma)) for m in (1.0, 2.0, 5.0)]
        fit_eta, fit_gamma = fit_kernel_model(samples)
        assert fit_eta == pytest.approx(eta, rel=1e-9, abs=1e-9)
        assert fit_gamma == pytest.approx(gamma, rel=1e-9, abs=1e-9)


class TestClassifyTask:
    def test_dominant_kernel(self, synthetic):
        assert classify_task(synthetic["T0"]) is TaskDominance.DOMINANT_KERNEL

    def test_dominant_transfer(self, synthetic):
        assert classify_task(synthetic["T7"]) is TaskDominance.DOMINANT_TRANSFER

    def test_boundary_is_dominant_kernel(self):
        task = TaskSpec(id="edge", fixed_durations=(2.0, 4.0, 2.0))
        assert classify_task(task) is TaskDominance.DOMINANT_KERNEL

    @given(st.floats(min_value=0.01, max_value=100))
    def test_invariant_under_uniform_scaling(self, scale):
        base = (1.0, 3.0, 1.5)
        task = TaskSpec(id="a", fixed_durations=base)
        scaled = TaskSpec(id="b", fixed_durations=tuple(scale * d for d in base))
        assert classify_task(task) is classify_task(scaled)


class TestValidation:
    def test_profile_rejects_bad_dma_count(self):
        with pytest.raises(ValueError):
            make_profile(dma_engines=3)

    def test_profile_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            make_profile(overlap_sigma=0.0)

    def test_task_rejects_negative_sizes(self):
        with pytest.raises(ValueError):
            TaskSpec(id="x", htd_bytes=-1)

    def test_task_rejects_all_zero_fixed(self):
        with pytest.raises(ValueError):
            TaskSpec(id="x", fixed_durations=(0.0, 0.0, 0.0))

    def test_stage_times_need_profile_for_bytes(self):
        with pytest.raises(UnresolvableDuration):
            stage_times(TaskSpec(id="x", htd_bytes=MB))

    def test_stage_times_fixed_win(self):
        task = TaskSpec(id="x", htd_bytes=8 * MB, fixed_durations=(1.0, 2.0, 3.0))
        assert stage_times(task, make_profile()) == (1.0, 2.0, 3.0)
