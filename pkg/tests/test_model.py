import numpy as np
import pytest

from prismcloud import (
    BinCounts,
    ColorBin,
    ColoredPoint,
    PointCloud,
    SamplerConfig,
)


class TestColoredPoint:
    def test_out_of_range_color_clamps(self):
        p = ColoredPoint(0, 0, 0, r=1.5, g=-0.2, b=0.5)
        assert (p.r, p.g, p.b) == (1.0, 0.0, 0.5)

    @pytest.mark.parametrize("coord", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite_coordinate_rejected(self, coord):
        with pytest.raises(ValueError):
            ColoredPoint(coord, 0, 0)

    def test_accessors(self):
        p = ColoredPoint(1, 2, 3, 0.1, 0.2, 0.3)
        assert np.allclose(p.position, [1, 2, 3])
        assert np.allclose(p.color, [0.1, 0.2, 0.3])


class TestPointCloud:
    def test_length_and_order_preserved(self):
        pts = [ColoredPoint(i, 0, 0, r=i / 10) for i in range(7)]
        cloud = PointCloud.from_points(pts)
        assert len(cloud) == 7
        for i, p in enumerate(cloud):
            assert p.x == i

    def test_empty_cloud_allowed(self):
        cloud = PointCloud(np.zeros((0, 3)))
        assert len(cloud) == 0

    def test_nan_positions_rejected(self):
        pos = np.zeros((3, 3))
        pos[1, 2] = np.nan
        with pytest.raises(ValueError):
            PointCloud(pos)

    def test_colors_clamped(self):
        cloud = PointCloud(np.zeros((1, 3)), np.array([[2.0, -1.0, 0.5]]))
        assert cloud.colors.tolist() == [[1.0, 0.0, 0.5]]

    def test_missing_colors_sets_colorless(self):
        assert PointCloud(np.zeros((4, 3))).colorless
        assert not PointCloud(np.zeros((4, 3)), np.zeros((4, 3))).colorless

    def test_normals_must_be_unit(self):
        pos = np.zeros((2, 3))
        with pytest.raises(ValueError):
            PointCloud(pos, normals=np.array([[1.0, 0, 0], [0, 2.0, 0]]))
        ok = PointCloud(pos, normals=np.array([[1.0, 0, 0], [0, 1.0, 0]]))
        assert ok.has_normals

    def test_normals_length_must_match(self):
        with pytest.raises(ValueError):
            PointCloud(np.zeros((3, 3)), normals=np.array([[0, 0, 1.0]]))

    def test_take_preserves_attributes(self):
        pos = np.arange(12, dtype=float).reshape(4, 3)
        col = np.linspace(0, 1, 12).reshape(4, 3)
        nrm = np.tile([0.0, 0.0, 1.0], (4, 1))
        cloud = PointCloud(pos, col, nrm)
        sub = cloud.take(np.array([2, 0]))
        assert np.array_equal(sub.positions, pos[[2, 0]])
        assert np.array_equal(sub.colors, col[[2, 0]])
        assert np.array_equal(sub.normals, nrm[[2, 0]])

    def test_arrays_are_read_only(self):
        cloud = PointCloud(np.zeros((2, 3)), np.zeros((2, 3)))
        with pytest.raises(ValueError):
            cloud.positions[0, 0] = 1.0


class TestColorBin:
    def test_key_round_trip(self):
        b = ColorBin(12, 200, 7)
        assert ColorBin.from_key(b.key) == b

    def test_achromatic_key_is_reserved(self):
        a = ColorBin.achromatic_bin()
        assert a.key == ColorBin.ACHROMATIC_KEY
        assert ColorBin.from_key(a.key).achromatic

    def test_channel_range_checked(self):
        with pytest.raises(ValueError):
            ColorBin(256, 0, 0)

    def test_keys_distinct_across_channels(self):
        # packing must not alias distinct channel triples
        seen = set()
        for rb in (0, 1, 255):
            for gb in (0, 1, 255):
                for bb in (0, 1, 255):
                    seen.add(ColorBin(rb, gb, bb).key)
        assert len(seen) == 27


class TestBinCounts:
    def test_total_is_sum(self):
        bc = BinCounts.from_counts([5, 3, 1])
        assert bc.total == 9
        assert len(bc) == 3

    def test_zero_counts_rejected(self):
        with pytest.raises(ValueError):
            BinCounts.from_counts([5, 0, 1])

    def test_duplicate_keys_rejected(self):
        with pytest.raises(ValueError):
            BinCounts(np.array([1, 1]), np.array([2, 3]))

    def test_from_mapping(self):
        bc = BinCounts.from_mapping({ColorBin(1, 2, 3): 4, ColorBin.achromatic_bin(): 2})
        assert bc.total == 6
        assert bc.as_dict()[ColorBin(1, 2, 3)] == 4


class TestSamplerConfig:
    def test_defaults_valid(self):
        cfg = SamplerConfig(method="prism", target_ratio=0.01)
        assert cfg.quant_bits == 0 and not cfg.chromaticity

    @pytest.mark.parametrize("ratio", [0.0, -0.5, 1.01])
    def test_ratio_domain(self, ratio):
        with pytest.raises(ValueError):
            SamplerConfig(method="random", target_ratio=ratio)

    def test_ratio_one_allowed(self):
        SamplerConfig(method="random", target_ratio=1.0)

    @pytest.mark.parametrize("bits", [3, 5, -1, 8])
    def test_quant_bits_enumerated(self, bits):
        with pytest.raises(ValueError):
            SamplerConfig(method="prism", target_ratio=0.1, quant_bits=bits)

    def test_prism_needs_a_driver(self):
        with pytest.raises(ValueError):
            SamplerConfig(method="prism")
        SamplerConfig(method="prism", explicit_k=3)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            SamplerConfig(method="octree", target_ratio=0.1)

    def test_seed_must_fit_64_bits(self):
        SamplerConfig(method="random", target_ratio=0.5, seed=2 ** 64 - 1)
        with pytest.raises(ValueError):
            SamplerConfig(method="random", target_ratio=0.5, seed=2 ** 64)
        with pytest.raises(ValueError):
            SamplerConfig(method="random", target_ratio=0.5, seed=-1)
