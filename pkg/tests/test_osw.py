import numpy as np
import pytest

from optstrain.flow import FlowField
from optstrain.lbptop import LbpTopParams
from optstrain.osw import osw_vector, spatial_pool, temporal_pool, weight_xy_histograms
from optstrain.strain import compute_strain
from oracles import naive_block_means
from conftest import make_sequence, textured_frame


def random_strain(rng, height, width):
    return compute_strain(FlowField(p=rng.random((height, width)), q=rng.random((height, width))))


class TestSpatialPool:
    def test_uniform_field(self):
        mag = np.full((15, 15), 0.3)
        for n in (1, 3, 5):
            assert np.allclose(spatial_pool(mag, n), 0.3, atol=1e-9)

    def test_exact_block_alignment(self):
        mag = np.zeros((10, 10))
        mag[:5, :5] = 1.0
        assert np.array_equal(spatial_pool(mag, 2), np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_remainder_blocks_match_oracle(self, rng):
        # summation order differs between mean() and the scalar oracle, so
        # agreement is to rounding noise, not bitwise
        mag = rng.random((17, 13))
        assert np.abs(spatial_pool(mag, 5) - naive_block_means(mag, 5)).max() < 1e-12

    def test_accepts_strain_map(self, rng):
        strain = random_strain(rng, 12, 12)
        got = spatial_pool(strain, 3)
        assert np.abs(got - naive_block_means(strain.magnitude, 3)).max() < 1e-12

    def test_oversized_grid_rejected(self):
        with pytest.raises(ValueError):
            spatial_pool(np.zeros((4, 4)), 5)


class TestTemporalPool:
    def test_single_map_identity(self, rng):
        means = rng.random((5, 5))
        assert np.array_equal(temporal_pool([means]), means)

    def test_two_map_mean(self):
        a = np.full((2, 2), 0.2)
        b = np.full((2, 2), 0.4)
        assert np.allclose(temporal_pool([a, b]), 0.3, atol=1e-12)

    def test_nine_maps_match_naive_sum(self, rng):
        mats = [rng.random((4, 4)) for _ in range(9)]
        expected = sum(mats) / 9.0
        assert np.allclose(temporal_pool(mats), expected, atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            temporal_pool([])


class TestWeightXy:
    def test_unit_weights_identity(self, rng):
        hists = rng.random((5, 5, 3, 15))
        out = weight_xy_histograms(hists, np.ones((5, 5)))
        assert np.array_equal(out, hists)

    def test_zero_weight_kills_xy_only(self, rng):
        hists = rng.random((3, 3, 3, 16)) + 0.1
        weights = np.ones((3, 3))
        weights[0, 0] = 0.0
        out = weight_xy_histograms(hists, weights)
        assert np.all(out[0, 0, 0] == 0.0)
        assert np.array_equal(out[0, 0, 1], hists[0, 0, 1])
        assert np.array_equal(out[0, 0, 2], hists[0, 0, 2])

    def test_random_inputs_match_elementwise_product(self, rng):
        hists = rng.random((4, 4, 3, 15))
        weights = rng.random((4, 4))
        out = weight_xy_histograms(hists, weights)
        for b1 in range(4):
            for b2 in range(4):
                assert np.array_equal(out[b1, b2, 0], weights[b1, b2] * hists[b1, b2, 0])
        assert np.array_equal(out[:, :, 1:], hists[:, :, 1:])

    def test_grid_mismatch(self, rng):
        with pytest.raises(ValueError):
            weight_xy_histograms(rng.random((4, 4, 3, 15)), np.ones((5, 5)))

    def test_scaling_weights_scales_xy_bins(self, rng):
        hists = rng.random((3, 3, 3, 15))
        weights = rng.random((3, 3)) + 0.1
        k = 4.2
        base = weight_xy_histograms(hists, weights)
        scaled = weight_xy_histograms(hists, k * weights)
        assert np.allclose(scaled[:, :, 0], k * base[:, :, 0], atol=1e-12)
        for b1 in range(3):
            for b2 in range(3):
                assert scaled[b1, b2, 0].argmax() == base[b1, b2, 0].argmax()


class TestOswVector:
    def test_static_sequence(self, rng):
        # constant frames: all weights 0, XY bins 0, XT/YT mass in the top code bin
        params = LbpTopParams(r_t=1, n_blocks=2, bins_per_plane=16)
        frames = [np.full((12, 12), 0.5)] * 4
        fv = osw_vector(make_sequence(frames), params, smooth=False)
        hists = fv.values.reshape(2, 2, 3, 16)
        assert np.all(hists[:, :, 0, :] == 0.0)
        assert np.allclose(hists[:, :, 1:, 15], 1.0)
        assert np.allclose(hists[:, :, 1:, :15], 0.0)

    def test_default_length_1125(self, rng):
        frames = [textured_frame(rng, 40, 40) for _ in range(10)]
        fv = osw_vector(make_sequence(frames))
        assert fv.values.shape == (5 * 5 * 3 * 15,)

    def test_n8_bins16_length_3072(self, rng):
        params = LbpTopParams(n_blocks=8, bins_per_plane=16)
        frames = [textured_frame(rng, 40, 40) for _ in range(10)]
        fv = osw_vector(make_sequence(frames), params)
        assert fv.values.shape == (8 * 8 * 3 * 16,)

    def test_separable_pooling_equals_global_block_mean(self, rng):
        maps = [random_strain(rng, 15, 12) for _ in range(7)]
        pooled = temporal_pool([spatial_pool(m, 3) for m in maps])
        stacked = np.stack([m.magnitude for m in maps])
        expected = np.empty((3, 3))
        from optstrain.lbptop import block_edges

        rows = block_edges(15, 3)
        cols = block_edges(12, 3)
        for i in range(3):
            for j in range(3):
                expected[i, j] = stacked[:, rows[i]:rows[i + 1], cols[j]:cols[j + 1]].mean()
        assert np.allclose(pooled, expected, atol=1e-9)

    def test_positive_strain_positive_weights(self, rng):
        maps = [random_strain(rng, 10, 10) for _ in range(3)]
        for m in maps:
            m.magnitude += 1e-6
        weights = temporal_pool([spatial_pool(m, 2) for m in maps])
        assert np.all(weights > 0.0)
