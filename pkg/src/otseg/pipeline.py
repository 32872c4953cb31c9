"""End-to-end composition: image -> palette -> superpixels -> region graph."""

from __future__ import annotations

from dataclasses import dataclass

from .histograms import (
    DEFAULT_AUX_REGIONS,
    DEFAULT_K,
    Palette,
    compute_palette,
    region_histograms,
)
from .image import Image, LabelMap, rgb_to_gray, rgb_to_lab, select_channels
from .merge import RegionGraph, build_rag
from .superpixel import SlicConfig, power_slic


@dataclass(frozen=True)
class PipelineResult:
    image: Image
    palette: Palette
    superpixels: LabelMap
    graph: RegionGraph


def convert_colorspace(img: Image, space: str) -> Image:
    """Convert a loaded image to the requested working space."""
    if space in (None, "auto") or space == img.space:
        return img
    if space == "lab":
        return rgb_to_lab(img)
    if space == "gray":
        return rgb_to_gray(img)
    if space == "rgb":
        raise ValueError(f"cannot convert {img.space} image to rgb")
    raise ValueError(f"unknown colorspace {space!r}")


def prepare(
    img: Image,
    m: int,
    k: int = DEFAULT_K,
    alpha: float = 10.0,
    aux_regions: int = DEFAULT_AUX_REGIONS,
    colorspace: str = "auto",
    channels=None,
    palette: Palette = None,
    iterations: int = 10,
) -> PipelineResult:
    """Shared front half of every mode: palette, superpixels, region graph."""
    img = convert_colorspace(img, colorspace)
    if channels is not None:
        img = select_channels(img, channels)
    if palette is None:
        palette = compute_palette(
            img, k=k, aux_regions=max(aux_regions, k), alpha=alpha
        )
    lm = power_slic(img, SlicConfig(m=m, alpha=alpha, iterations=iterations))
    stats = region_histograms(img, lm, palette)
    graph = build_rag(lm, stats, palette)
    return PipelineResult(image=img, palette=palette, superpixels=lm, graph=graph)
