import numpy as np
import pytest

from poissonprop import (
    BACKGROUND,
    FOREGROUND,
    UNLABELED,
    FeatureMap,
    SoftMask,
    assign_prototype_labels,
    local_prototype_pool,
    masked_average_pool,
)
from poissonprop.errors import DegenerateMask, GridMismatch, WindowTooLarge


@pytest.fixture
def fmap44():
    rng = np.random.default_rng(10)
    return FeatureMap(rng.standard_normal((3, 4, 4)))


class TestLocalPool:
    def test_count_and_order(self, fmap44):
        protos = local_prototype_pool(fmap44, (2, 2))
        assert len(protos) == 4
        assert [p.grid_pos for p in protos] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert all(p.label == UNLABELED for p in protos)

    def test_full_window_is_global_mean(self, fmap44):
        (proto,) = local_prototype_pool(fmap44, (4, 4))
        assert np.allclose(proto.vector, fmap44.data.mean(axis=(1, 2)), atol=1e-12)

    def test_constant_map_gives_identical_prototypes(self):
        fmap = FeatureMap(np.full((2, 4, 4), 3.5))
        protos = local_prototype_pool(fmap, (2, 2))
        for p in protos:
            assert np.allclose(p.vector, 3.5, atol=1e-12)

    def test_unit_window_reproduces_pixels(self, fmap44):
        protos = local_prototype_pool(fmap44, (1, 1))
        stacked = np.stack([p.vector for p in protos])
        assert np.array_equal(stacked, fmap44.pixel_vectors())

    def test_window_too_large(self, fmap44):
        with pytest.raises(WindowTooLarge):
            local_prototype_pool(fmap44, (8, 2))


class TestLabeling:
    def test_all_ones_all_foreground(self, fmap44):
        protos = local_prototype_pool(fmap44, (2, 2))
        labeled = assign_prototype_labels(protos, SoftMask(np.ones((2, 2))), 0.5)
        assert all(p.label == FOREGROUND for p in labeled)

    def test_all_zeros_all_background(self, fmap44):
        protos = local_prototype_pool(fmap44, (2, 2))
        labeled = assign_prototype_labels(protos, SoftMask(np.zeros((2, 2))), 0.5)
        assert all(p.label == BACKGROUND for p in labeled)

    def test_threshold_is_inclusive(self, fmap44):
        protos = local_prototype_pool(fmap44, (4, 4))
        labeled = assign_prototype_labels(protos, SoftMask(np.array([[0.5]])), 0.5)
        assert labeled[0].label == FOREGROUND

    def test_grid_mismatch(self, fmap44):
        protos = local_prototype_pool(fmap44, (2, 2))
        with pytest.raises(GridMismatch):
            assign_prototype_labels(protos, SoftMask(np.ones((1, 1))), 0.5)

    def test_threshold_range_checked(self, fmap44):
        protos = local_prototype_pool(fmap44, (2, 2))
        for bad in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                assign_prototype_labels(protos, SoftMask(np.ones((2, 2))), bad)

    def test_originals_untouched(self, fmap44):
        protos = local_prototype_pool(fmap44, (2, 2))
        assign_prototype_labels(protos, SoftMask(np.ones((2, 2))), 0.5)
        assert all(p.label == UNLABELED for p in protos)


class TestMaskedAveragePool:
    def test_uniform_mask_is_global_mean(self, fmap44):
        proto = masked_average_pool(fmap44, SoftMask(np.ones((4, 4))))
        assert np.allclose(proto.vector, fmap44.data.mean(axis=(1, 2)), atol=1e-12)

    def test_one_hot_mask_selects_pixel(self, fmap44):
        mask = np.zeros((4, 4))
        mask[1, 2] = 1.0
        proto = masked_average_pool(fmap44, SoftMask(mask))
        assert np.allclose(proto.vector, fmap44.data[:, 1, 2], atol=1e-12)

    def test_zero_mask_degenerate(self, fmap44):
        with pytest.raises(DegenerateMask):
            masked_average_pool(fmap44, SoftMask(np.zeros((4, 4))))

    def test_mask_dims_must_match(self, fmap44):
        with pytest.raises(GridMismatch):
            masked_average_pool(fmap44, SoftMask(np.ones((2, 2))))

    def test_rescale_invariance(self, fmap44):
        rng = np.random.default_rng(11)
        weights = rng.uniform(0.1, 1.0, (4, 4))
        a = masked_average_pool(fmap44, SoftMask(weights)).vector
        b = masked_average_pool(fmap44, SoftMask(weights * 0.125)).vector
        assert np.allclose(a, b, atol=1e-12)

    def test_output_in_convex_hull(self, fmap44):
        rng = np.random.default_rng(12)
        weights = rng.uniform(0.0, 1.0, (4, 4))
        proto = masked_average_pool(fmap44, SoftMask(weights)).vector
        lo = fmap44.data.min(axis=(1, 2))
        hi = fmap44.data.max(axis=(1, 2))
        assert np.all(proto >= lo - 1e-12)
        assert np.all(proto <= hi + 1e-12)
