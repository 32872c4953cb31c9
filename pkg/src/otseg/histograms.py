"""Representative colors and region histograms.

The palette comes from an auxiliary Power-SLIC pass: colors are averaged per
auxiliary region, averages are quantized to 8 bits per channel, and the k
quantized values covering the largest total pixel area become the bin
centers.  Region histograms are kept as integer bin counts plus the region
area; merging regions is then exact integer addition, and the counts are
normalized only when a distance is solved.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .image import Image, LabelMap
from .ot import Histogram
from .superpixel import SlicConfig, power_slic

logger = logging.getLogger(__name__)

DEFAULT_K = 15
DEFAULT_AUX_REGIONS = 300


@dataclass(frozen=True)
class Palette:
    """Shared bin centers: (k, C) distinct color vectors."""

    centers: np.ndarray

    def __post_init__(self):
        centers = np.ascontiguousarray(self.centers, dtype=np.float64)
        if centers.ndim == 1:
            centers = centers[:, None]
        if centers.ndim != 2 or centers.shape[0] < 1:
            raise ValueError("palette needs at least one center")
        if len(np.unique(centers, axis=0)) != centers.shape[0]:
            raise ValueError("palette centers must be pairwise distinct")
        object.__setattr__(self, "centers", centers)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def channels(self) -> int:
        return self.centers.shape[1]

    def to_json(self) -> str:
        return json.dumps({"centers": self.centers.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Palette":
        return cls(np.array(json.loads(text)["centers"], dtype=np.float64))


@dataclass(frozen=True)
class RegionStats:
    """Integer bin counts plus area; the float histogram is derived."""

    counts: np.ndarray
    area: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1:
            raise ValueError("counts must be a vector")
        if counts.min(initial=0) < 0:
            raise ValueError("negative bin count")
        if self.area < 1:
            raise ValueError("region area must be >= 1")
        if counts.sum() != self.area:
            raise ValueError("bin counts must sum to the region area")
        object.__setattr__(self, "counts", counts)

    @property
    def weights(self) -> np.ndarray:
        return self.counts / self.area

    @property
    def hist(self) -> Histogram:
        return Histogram(weights=self.weights, count=self.area)


def compute_palette(
    img: Image,
    k: int = DEFAULT_K,
    aux_regions: int = DEFAULT_AUX_REGIONS,
    alpha: float = 10.0,
) -> Palette:
    """Representative colors from an auxiliary Power-SLIC partition.

    If fewer than k distinct quantized averages exist, the palette shrinks
    and the reduction is logged.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if aux_regions < k:
        raise ValueError("aux_regions must be >= k")
    m = min(aux_regions, img.pixel_count)
    lm = power_slic(img, SlicConfig(m=m, alpha=alpha))
    labels = lm.labels.reshape(-1)
    n = int(labels.max()) + 1
    areas = np.bincount(labels, minlength=n)
    colors = img.colors()
    means = np.empty((n, img.channels))
    for c in range(img.channels):
        means[:, c] = np.bincount(labels, weights=colors[:, c], minlength=n) / areas
    quantized = np.round(means * 255.0) / 255.0

    freq = {}
    for region in range(n):
        key = tuple(quantized[region])
        freq[key] = freq.get(key, 0) + int(areas[region])
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    if len(ranked) < k:
        logger.warning(
            "palette reduced from k=%d to %d distinct quantized averages",
            k,
            len(ranked),
        )
        k = len(ranked)
    centers = np.array([key for key, _ in ranked[:k]], dtype=np.float64)
    return Palette(centers)


def bin_index(color, pal: Palette) -> int:
    """Nearest palette center for one color; ties keep the lowest index."""
    color = np.atleast_1d(np.asarray(color, dtype=np.float64))
    if not np.isfinite(color).all():
        raise ValueError("color must be finite")
    return int(_kernels.assign_bins(color[None, :], pal.centers)[0])


def assign_bin_map(img: Image, pal: Palette) -> np.ndarray:
    """Per-pixel bin index, shape (H, W) int32."""
    return _kernels.assign_bins(img.colors(), pal.centers).reshape(
        img.height, img.width
    )


def region_histograms(img: Image, lm: LabelMap, pal: Palette) -> list:
    """RegionStats per label id (labels must be compact 0..m-1)."""
    if (lm.height, lm.width) != (img.height, img.width):
        raise ValueError("label map dimensions do not match the image")
    labels = lm.labels.reshape(-1)
    bins = _kernels.assign_bins(img.colors(), pal.centers).astype(np.int64)
    n = int(labels.max()) + 1
    k = pal.k
    table = np.bincount(labels * k + bins, minlength=n * k).reshape(n, k)
    stats = []
    for region in range(n):
        area = int(table[region].sum())
        if area == 0:
            raise ValueError(f"region {region} is empty")
        stats.append(RegionStats(counts=table[region], area=area))
    return stats


def merge_stats(a: RegionStats, b: RegionStats) -> RegionStats:
    """Histogram of the union: exact integer addition of counts and areas."""
    if a.counts.size != b.counts.size:
        raise ValueError("histograms have different palette lengths")
    return RegionStats(counts=a.counts + b.counts, area=a.area + b.area)
