import numpy as np
import pytest

from poissonprop import FeatureMap, SoftMask, Tensor, avg_pool, cosine_similarity, downsample_mask
from poissonprop.errors import LengthMismatch, UpsampleRequested, WindowTooLarge


class TestContainers:
    def test_tensor_rejects_nan(self):
        with pytest.raises(ValueError, match="NaN"):
            Tensor(np.array([1.0, np.nan]))

    def test_tensor_rejects_inf(self):
        with pytest.raises(ValueError):
            Tensor(np.array([[np.inf]]))

    def test_tensor_dims(self):
        t = Tensor(np.zeros((2, 3, 4)))
        assert t.dims == (2, 3, 4)

    def test_feature_map_requires_rank3(self):
        with pytest.raises(ValueError):
            FeatureMap(np.zeros((4, 4)))

    def test_mask_range_enforced(self):
        with pytest.raises(ValueError):
            SoftMask(np.array([[0.5, 1.2]]))
        with pytest.raises(ValueError):
            SoftMask(np.array([[-0.1, 0.0]]))

    def test_data_widened_to_float64(self):
        fmap = FeatureMap(np.zeros((1, 2, 2), dtype=np.float32))
        assert fmap.data.dtype == np.float64

    def test_pixel_vectors_row_major(self):
        fmap = FeatureMap(np.arange(8.0).reshape(2, 2, 2))
        vecs = fmap.pixel_vectors()
        # pixel (0, 1) holds channels [1, 5]
        assert np.array_equal(vecs[1], [1.0, 5.0])


class TestAvgPool:
    def test_two_by_two_mean(self):
        fmap = FeatureMap([[[1.0, 2.0], [3.0, 4.0]]])
        out = avg_pool(fmap, (2, 2))
        assert out.data.shape == (1, 1, 1)
        assert out.data[0, 0, 0] == 2.5

    def test_unit_window_is_identity(self):
        rng = np.random.default_rng(0)
        fmap = FeatureMap(rng.standard_normal((3, 4, 5)))
        out = avg_pool(fmap, (1, 1), (1, 1))
        assert np.array_equal(out.data, fmap.data)

    def test_constant_map_stays_constant(self):
        fmap = FeatureMap(np.full((2, 6, 6), 7.25))
        out = avg_pool(fmap, (3, 2))
        assert np.allclose(out.data, 7.25, atol=1e-12)

    def test_full_window_is_global_mean(self):
        rng = np.random.default_rng(1)
        fmap = FeatureMap(rng.standard_normal((4, 6, 8)))
        out = avg_pool(fmap, (6, 8))
        expected = fmap.data.mean(axis=(1, 2))
        assert np.allclose(out.data[:, 0, 0], expected, atol=1e-12)

    def test_window_too_large(self):
        fmap = FeatureMap(np.zeros((1, 4, 4)))
        with pytest.raises(WindowTooLarge):
            avg_pool(fmap, (5, 2))
        with pytest.raises(WindowTooLarge):
            avg_pool(fmap, (2, 5))

    def test_partial_windows_rejected(self):
        fmap = FeatureMap(np.zeros((1, 5, 4)))
        with pytest.raises(ValueError, match="tile"):
            avg_pool(fmap, (2, 2))

    def test_overlapping_stride(self):
        fmap = FeatureMap(np.arange(4.0).reshape(1, 1, 4))
        out = avg_pool(fmap, (1, 2), (1, 1))
        assert np.allclose(out.data[0, 0], [0.5, 1.5, 2.5])

    def test_linearity(self):
        rng = np.random.default_rng(2)
        f = rng.standard_normal((2, 4, 4))
        g = rng.standard_normal((2, 4, 4))
        a, b = 1.7, -0.35
        lhs = avg_pool(FeatureMap(a * f + b * g), (2, 2)).data
        rhs = a * avg_pool(FeatureMap(f), (2, 2)).data + b * avg_pool(FeatureMap(g), (2, 2)).data
        assert np.allclose(lhs, rhs, atol=1e-12)


class TestCosine:
    def test_identical_vectors(self):
        v = np.array([1.0, 2.0, -3.0])
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 2.0]) == 0.0

    def test_antipodal(self):
        v = np.array([0.5, -1.5])
        assert cosine_similarity(v, -v) == pytest.approx(-1.0, abs=1e-12)

    def test_zero_vector_convention(self):
        assert cosine_similarity([0.0, 0.0], [1.0, 1.0]) == 0.0
        assert cosine_similarity([1e-13, 0.0], [1.0, 1.0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            cosine_similarity([1.0], [1.0, 2.0])

    def test_positive_scale_invariance(self):
        rng = np.random.default_rng(3)
        u = rng.standard_normal(6)
        v = rng.standard_normal(6)
        base = cosine_similarity(u, v)
        for c in (1e-3, 7.0, 1e4):
            assert cosine_similarity(c * u, v) == pytest.approx(base, abs=1e-12)


class TestDownsample:
    def test_all_ones_preserved(self):
        out = downsample_mask(SoftMask(np.ones((4, 4))), (2, 2))
        assert np.array_equal(out.data, np.ones((2, 2)))

    def test_quarter_mean(self):
        mask = SoftMask(np.array([[1.0, 0.0], [0.0, 0.0]]))
        out = downsample_mask(mask, (1, 1))
        assert out.data[0, 0] == pytest.approx(0.25, abs=1e-12)

    def test_identity_target(self):
        rng = np.random.default_rng(4)
        mask = SoftMask(rng.uniform(0, 1, (3, 5)))
        out = downsample_mask(mask, (3, 5))
        assert np.array_equal(out.data, mask.data)

    def test_upsample_rejected(self):
        mask = SoftMask(np.zeros((2, 2)))
        with pytest.raises(UpsampleRequested):
            downsample_mask(mask, (4, 2))

    def test_mean_preserved_on_even_division(self):
        rng = np.random.default_rng(5)
        mask = SoftMask(rng.uniform(0, 1, (8, 12)))
        out = downsample_mask(mask, (4, 3))
        assert out.data.mean() == pytest.approx(mask.data.mean(), abs=1e-12)

    def test_fractional_footprint(self):
        # 3 -> 2 cells: footprints [0, 1.5) and [1.5, 3)
        mask = SoftMask(np.array([[1.0, 1.0, 0.0]]))
        out = downsample_mask(mask, (1, 2))
        assert out.data[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert out.data[0, 1] == pytest.approx(0.5 / 1.5, abs=1e-12)

    def test_values_stay_in_range(self):
        rng = np.random.default_rng(6)
        mask = SoftMask(rng.uniform(0, 1, (7, 9)))
        out = downsample_mask(mask, (3, 4))
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0
