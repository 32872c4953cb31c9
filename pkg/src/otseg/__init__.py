"""otseg: superpixel segmentation with optimal-transport region merging.

Pipeline: Power-SLIC oversegmentation, region color histograms over a small
shared palette, then greedy merging of adjacent regions by regularized
squared 2-Wasserstein cost.  Unsupervised, automatic-region-count, and
marker-guided modes share the same region graph.
"""

from ._kernels import BACKEND as kernel_backend
from .histograms import Palette, RegionStats, compute_palette, merge_stats, region_histograms
from .image import Image, LabelMap, load_image, load_labels, save_image, save_labels
from .merge import (
    MarkerSet,
    MergeTrace,
    RegionGraph,
    build_rag,
    compute_roc,
    energy,
    merge_cost,
    partition_at,
    run_marker,
    run_unsupervised,
)
from .ot import (
    Histogram,
    TransportPlan,
    TransportProblem,
    fractional_assignment,
    solve_transportation,
    wasserstein2_sq,
)
from .pipeline import PipelineResult, prepare
from .superpixel import Generator, SlicConfig, power_slic
from .synth import SyntheticScene, generate_disks, generate_panels

__version__ = "0.1.0"

__all__ = [
    "Generator",
    "Histogram",
    "Image",
    "LabelMap",
    "MarkerSet",
    "MergeTrace",
    "Palette",
    "PipelineResult",
    "RegionGraph",
    "RegionStats",
    "SlicConfig",
    "SyntheticScene",
    "TransportPlan",
    "TransportProblem",
    "build_rag",
    "compute_palette",
    "compute_roc",
    "energy",
    "fractional_assignment",
    "generate_disks",
    "generate_panels",
    "kernel_backend",
    "load_image",
    "load_labels",
    "merge_cost",
    "merge_stats",
    "partition_at",
    "power_slic",
    "prepare",
    "region_histograms",
    "run_marker",
    "run_unsupervised",
    "save_image",
    "save_labels",
    "solve_transportation",
    "wasserstein2_sq",
]
