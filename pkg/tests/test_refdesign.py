import numpy as np
import pytest

from mprkit.core import Frame
from mprkit.opusim import CameraConfig, SimulatedOPU, draw_transmission_matrix
from mprkit.refdesign import (
    AnchorSaturatedError,
    ReferenceDesignConfig,
    design_binary_references,
    design_with_stats,
    estimate_sensitivity_threshold,
    load_reference_set,
    save_reference_set,
)


def random_binary_frames(n, count, density, rng):
    return [
        Frame(values=(rng.random(n) < density).astype(float), frame_index=i + 1)
        for i in range(count)
    ]


def assert_valid_design(refs, frames):
    chain = refs.anchors[:-1]
    # nested supports along the generated chain
    for lo, hi in zip(chain, chain[1:]):
        assert np.all(hi[lo == 1] == 1)
    # all chain differences and frame differences stay binary
    for i, lo in enumerate(chain):
        for hi in chain[i + 1:]:
            assert set(np.unique(hi - lo)) <= {0.0, 1.0}
    for f in frames:
        for anchor in chain:
            assert set(np.unique(anchor - f.values)) <= {0.0, 1.0}
    assert np.all(refs.anchors[-1] == 0)


class TestDesignBinaryReferences:
    def test_invariants_hold_over_random_inputs(self):
        rng = np.random.default_rng(0)
        for seed in range(20):
            frames = random_binary_frames(512, 3, 0.2, rng)
            cfg = ReferenceDesignConfig(flip_probability=0.2, anchor_count=9, seed=seed)
            refs = design_binary_references(frames, cfg)
            assert refs.count == 9
            assert_valid_design(refs, frames)

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        frames = random_binary_frames(256, 2, 0.3, rng)
        cfg = ReferenceDesignConfig(flip_probability=0.25, anchor_count=5, seed=42)
        a = design_binary_references(frames, cfg)
        b = design_binary_references(frames, cfg)
        for x, y in zip(a.anchors, b.anchors):
            assert np.array_equal(x, y)

    def test_single_basis_vector_chain(self):
        # with a tiny flip probability some seed gives the minimal chain:
        # r_1 = the frame support itself, r_2 one flip bigger
        frame = Frame(values=np.eye(8)[0])
        for seed in range(200):
            cfg = ReferenceDesignConfig(
                flip_probability=0.05, anchor_count=3, seed=seed
            )
            refs = design_binary_references([frame], cfg)
            sizes = [int(a.sum()) for a in refs.anchors]
            if sizes[:2] == [1, 2]:
                assert_valid_design(refs, [frame])
                break
        else:
            pytest.fail("no seed produced the minimal nested chain")

    def test_saturation_error_names_anchor(self):
        # alpha near 1 on a tiny signal saturates the chain immediately
        frame = Frame(values=np.ones(4))
        cfg = ReferenceDesignConfig(
            flip_probability=0.99, anchor_count=4, seed=0, max_retries=0
        )
        with pytest.raises(AnchorSaturatedError) as err:
            design_binary_references([frame], cfg)
        assert err.value.anchor_index >= 1
        assert str(err.value.anchor_index) in str(err.value)

    def test_retry_recovers_when_possible(self):
        rng = np.random.default_rng(3)
        frames = random_binary_frames(4096, 2, 0.25, rng)
        cfg = ReferenceDesignConfig(flip_probability=0.2, anchor_count=9, seed=7)
        refs, attempts = design_with_stats(frames, cfg)
        assert attempts <= cfg.max_retries
        assert_valid_design(refs, frames)

    def test_rejects_non_binary_frame(self):
        cfg = ReferenceDesignConfig()
        with pytest.raises(ValueError):
            design_binary_references([Frame(values=np.full(8, 0.5))], cfg)


class TestEstimateSensitivityThreshold:
    def test_noiseless_gives_zero(self):
        tm = draw_transmission_matrix(16, 8, seed=0)
        opu = SimulatedOPU(tm, CameraConfig())
        assert estimate_sensitivity_threshold(opu, repeats=5) == 0.0

    def test_recovers_injected_dark_level(self):
        tm = draw_transmission_matrix(16, 8, seed=0)
        opu = SimulatedOPU(tm, CameraConfig(dark_level=6.0))
        assert estimate_sensitivity_threshold(opu, repeats=5, statistic="mode") == 6.0
        assert estimate_sensitivity_threshold(opu, repeats=5, statistic="min") == 6.0
        assert estimate_sensitivity_threshold(opu, repeats=5, statistic="mean") == 6.0

    def test_single_repeat(self):
        tm = draw_transmission_matrix(4, 8, seed=0)
        opu = SimulatedOPU(tm, CameraConfig(dark_level=2.0))
        assert estimate_sensitivity_threshold(opu, repeats=1) == 2.0

    def test_rejects_bad_statistic(self):
        tm = draw_transmission_matrix(4, 8, seed=0)
        opu = SimulatedOPU(tm, CameraConfig())
        with pytest.raises(ValueError):
            estimate_sensitivity_threshold(opu, statistic="median")


class TestReferenceSetTextFormat:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        frames = random_binary_frames(64, 2, 0.3, rng)
        refs = design_binary_references(
            frames, ReferenceDesignConfig(flip_probability=0.3, anchor_count=4, seed=1)
        )
        path = tmp_path / "refs.txt"
        save_reference_set(refs, path)
        back = load_reference_set(path)
        assert back.count == refs.count
        for x, y in zip(back.anchors, refs.anchors):
            assert np.array_equal(x, y)

    def test_rejects_non_binary_anchor(self, tmp_path):
        from mprkit.core import ReferenceSet

        refs = ReferenceSet(anchors=(np.full(4, 0.5), np.zeros(4)))
        with pytest.raises(ValueError):
            save_reference_set(refs, tmp_path / "bad.txt")
