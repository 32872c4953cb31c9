import numpy as np
import pytest

from otseg.histograms import (
    Palette,
    RegionStats,
    bin_index,
    compute_palette,
    merge_stats,
    region_histograms,
)
from otseg.image import Image, LabelMap

from conftest import random_partition
from oracles import histogram_recompute


class TestPalette:
    def test_defaults_match_reported_constants(self):
        import inspect

        sig = inspect.signature(compute_palette)
        assert sig.parameters["k"].default == 15
        assert sig.parameters["aux_regions"].default == 300

    def test_two_blob_image(self):
        data = np.full((24, 24, 1), 0.2)
        data[:, 12:] = 0.8
        pal = compute_palette(Image(data, "gray"), k=2, aux_regions=16)
        got = sorted(pal.centers[:, 0].tolist())
        assert got[0] == pytest.approx(0.2, abs=1 / 255)
        assert got[1] == pytest.approx(0.8, abs=1 / 255)

    def test_constant_image_reduces_k(self, caplog):
        import logging

        data = np.full((16, 16, 1), 0.5)
        with caplog.at_level(logging.WARNING):
            pal = compute_palette(Image(data, "gray"), k=15, aux_regions=15)
        assert pal.k == 1
        assert pal.centers[0, 0] == pytest.approx(0.5, abs=1 / 255)
        assert any("reduced" in rec.message for rec in caplog.records)

    def test_distinct_centers_required(self):
        with pytest.raises(ValueError):
            Palette(np.array([[0.1], [0.1]]))

    def test_json_roundtrip(self, rng):
        pal = Palette(rng.random((5, 3)))
        back = Palette.from_json(pal.to_json())
        np.testing.assert_array_equal(back.centers, pal.centers)


class TestBinIndex:
    def test_exact_center(self, rng):
        pal = Palette(np.linspace(0, 1, 7)[:, None])
        assert bin_index([pal.centers[3, 0]], pal) == 3

    def test_nearest(self):
        pal = Palette(np.array([[0.0], [1.0]]))
        assert bin_index([0.4], pal) == 0
        assert bin_index([0.6], pal) == 1

    def test_tie_lowest_index(self):
        pal = Palette(np.array([[0.0], [1.0]]))
        assert bin_index([0.5], pal) == 0

    def test_nonfinite_rejected(self):
        pal = Palette(np.array([[0.0], [1.0]]))
        with pytest.raises(ValueError):
            bin_index([np.nan], pal)


class TestRegionHistograms:
    def test_monochrome_one_hot(self):
        img = Image(np.full((4, 4, 1), 0.73), "gray")
        lm = LabelMap(np.zeros((4, 4), dtype=np.int32))
        pal = Palette(np.array([[0.1], [0.7], [0.9]]))
        stats = region_histograms(img, lm, pal)
        np.testing.assert_array_equal(stats[0].counts, [0, 16, 0])

    def test_four_pixel_example(self):
        img = Image(np.array([[0.1, 0.2], [0.9, 0.9]])[:, :, None], "gray")
        lm = LabelMap(np.zeros((2, 2), dtype=np.int32))
        pal = Palette(np.array([[0.0], [1.0]]))
        stats = region_histograms(img, lm, pal)
        np.testing.assert_array_equal(stats[0].counts, [2, 2])
        np.testing.assert_array_equal(stats[0].weights, [0.5, 0.5])

    def test_whole_image_global_frequency(self, rng):
        img = Image(rng.random((8, 8, 2)), "custom")
        lm = LabelMap(np.zeros((8, 8), dtype=np.int32))
        pal = Palette(rng.random((5, 2)))
        stats = region_histograms(img, lm, pal)
        want = histogram_recompute(
            img.colors(), np.ones(64, dtype=bool), pal.centers
        )
        np.testing.assert_array_equal(stats[0].counts, want)

    def test_counts_are_exact(self, rng):
        img = Image(rng.random((10, 12, 1)), "gray")
        lm = random_partition(rng, 10, 12, 6)
        pal = Palette(np.linspace(0, 1, 4)[:, None])
        stats = region_histograms(img, lm, pal)
        for region, s in enumerate(stats):
            assert s.counts.sum() == s.area
            assert abs(s.weights.sum() - 1.0) < 1e-12
            want = histogram_recompute(
                img.colors(), lm.labels.reshape(-1) == region, pal.centers
            )
            np.testing.assert_array_equal(s.counts, want)

    def test_dims_mismatch(self):
        img = Image(np.zeros((3, 3, 1)), "gray")
        lm = LabelMap(np.zeros((2, 2), dtype=np.int32))
        with pytest.raises(ValueError):
            region_histograms(img, lm, Palette(np.array([[0.0]])))


class TestMergeStats:
    def test_equal_areas_mean(self):
        a = RegionStats(np.array([4, 0]), 4)
        b = RegionStats(np.array([0, 4]), 4)
        merged = merge_stats(a, b)
        np.testing.assert_array_equal(merged.weights, [0.5, 0.5])
        assert merged.area == 8

    def test_one_hot_into_three(self):
        a = RegionStats(np.array([2, 1, 0]), 3)
        b = RegionStats(np.array([0, 0, 1]), 1)
        merged = merge_stats(a, b)
        np.testing.assert_array_equal(merged.counts, [2, 1, 1])
        np.testing.assert_allclose(merged.weights, (3 * a.weights + [0, 0, 1]) / 4)

    def test_matches_recomputed_union(self, rng):
        img = Image(rng.random((9, 9, 1)), "gray")
        lm = random_partition(rng, 9, 9, 5)
        pal = Palette(np.linspace(0.05, 0.95, 3)[:, None])
        stats = region_histograms(img, lm, pal)
        merged = merge_stats(stats[0], stats[1])
        mask = (lm.labels.reshape(-1) == 0) | (lm.labels.reshape(-1) == 1)
        want = histogram_recompute(img.colors(), mask, pal.centers)
        np.testing.assert_array_equal(merged.counts, want)

    def test_associative_commutative_exact(self, rng):
        parts = []
        for _ in range(4):
            counts = rng.integers(0, 9, size=4) + np.array([1, 0, 0, 0])
            parts.append(RegionStats(counts, int(counts.sum())))
        ab_c = merge_stats(merge_stats(parts[0], parts[1]), parts[2])
        a_bc = merge_stats(parts[0], merge_stats(parts[1], parts[2]))
        np.testing.assert_array_equal(ab_c.counts, a_bc.counts)
        ba = merge_stats(parts[1], parts[0])
        ab = merge_stats(parts[0], parts[1])
        np.testing.assert_array_equal(ab.counts, ba.counts)

    def test_refinement_reproduces_whole(self, rng):
        img = Image(rng.random((12, 8, 1)), "gray")
        lm = random_partition(rng, 12, 8, 7)
        pal = Palette(np.linspace(0, 1, 5)[:, None])
        stats = region_histograms(img, lm, pal)
        total = stats[0]
        for s in stats[1:]:
            total = merge_stats(total, s)
        whole = region_histograms(
            img, LabelMap(np.zeros((12, 8), dtype=np.int32)), pal
        )[0]
        np.testing.assert_array_equal(total.counts, whole.counts)
        assert total.area == 96

    def test_palette_length_mismatch(self):
        with pytest.raises(ValueError):
            merge_stats(RegionStats(np.array([1]), 1), RegionStats(np.array([1, 0]), 1))
