"""Synthetic scenes with exact ground truth.

Two generators: white disks on a dark background (noisy grayscale, optional
occlusion) and staged panel collages whose adjacent panels carry strongly
different gray levels, used for region-count selection experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import Image, LabelMap


@dataclass(frozen=True)
class SyntheticScene:
    image: Image
    truth: LabelMap
    n_objects: int
    noise_sigma: float


def generate_disks(
    seed: int,
    count: int = 25,
    size=(256, 256),
    noise_sigma: float = 0.1,
    allow_occlusion: bool = False,
    radius_range=None,
    background: float = 0.2,
    foreground: float = 1.0,
    margin: int = 8,
) -> SyntheticScene:
    """Noisy grayscale scene of bright disks on a dark background.

    Truth label 0 is the background, 1..count the disks (later disks win
    overlapping pixels when occlusion is allowed).  Deterministic for a
    fixed seed; raises if non-occluding disks cannot be packed.
    """
    H, W = size
    rng = np.random.default_rng(seed)
    if radius_range is None:
        # disks cover roughly 31% of the canvas in a narrow size band;
        # margins keep background corridors between disks clear
        base = math.sqrt(0.31 * H * W / (math.pi * count))
        radius_range = (max(3.0, 0.875 * base), 1.125 * base)
    rmin, rmax = radius_range
    if 2 * rmax + 2 > min(H, W):
        raise ValueError("disks do not fit in the canvas")

    placed = None
    for _ in range(30):  # whole-layout restarts
        radii = np.sort(rng.uniform(rmin, rmax, size=count))[::-1]
        trial = []
        ok_layout = True
        for r in radii:
            r = float(r)
            for _ in range(400):
                cy = float(rng.uniform(r + 1, H - r - 1))
                cx = float(rng.uniform(r + 1, W - r - 1))
                if allow_occlusion or all(
                    (cy - py) ** 2 + (cx - px) ** 2 >= (r + pr + margin) ** 2
                    for py, px, pr in trial
                ):
                    trial.append((cy, cx, r))
                    break
            else:
                ok_layout = False
                break
        if ok_layout:
            placed = trial
            break
    if placed is None:
        raise ValueError(f"could not pack {count} disks after bounded retries")

    ys = np.arange(H)[:, None]
    xs = np.arange(W)[None, :]
    clean = np.full((H, W), background)
    truth = np.zeros((H, W), dtype=np.int32)
    for idx, (cy, cx, r) in enumerate(placed):
        mask = (ys - cy) ** 2 + (xs - cx) ** 2 <= r * r
        clean[mask] = foreground
        truth[mask] = idx + 1
    noisy = np.clip(clean + rng.normal(0.0, noise_sigma, size=(H, W)), 0.0, 1.0)
    return SyntheticScene(
        image=Image(noisy[:, :, None], "gray"),
        truth=LabelMap(truth),
        n_objects=count,
        noise_sigma=noise_sigma,
    )


def generate_lattice(
    seed: int,
    size=(384, 384),
    cell_pitch: float = 24.0,
    grout_frac: float = 0.25,
    noise_sigma: float = 0.05,
    cell_level: float = 0.85,
    grout_level: float = 0.15,
) -> SyntheticScene:
    """Bright cells on a connected dark lattice (grout).

    The grout is one connected region touching every cell, which drives the
    merge loop into its worst-case regime: once the grout has consolidated,
    every remaining merge rescans a neighborhood proportional to the number
    of live regions.  Used by the scaling benchmark.
    """
    H, W = size
    rng = np.random.default_rng(seed)
    pitch = max(4.0, float(cell_pitch))
    grout = max(2, int(round(pitch * grout_frac)))
    cell = max(2, int(round(pitch)) - grout)
    ys = np.arange(H)
    xs = np.arange(W)
    in_cell_y = (ys % (cell + grout)) < cell
    in_cell_x = (xs % (cell + grout)) < cell
    cell_mask = in_cell_y[:, None] & in_cell_x[None, :]
    # cells clipped by the border stay part of the grout
    row_id = ys // (cell + grout)
    col_id = xs // (cell + grout)
    full_y = (row_id + 1) * (cell + grout) - grout <= H
    full_x = (col_id + 1) * (cell + grout) - grout <= W
    cell_mask &= full_y[:, None] & full_x[None, :]

    n_cols = int(col_id.max()) + 1
    cell_ids = (row_id[:, None] * n_cols + col_id[None, :] + 1).astype(np.int32)
    truth = np.where(cell_mask, cell_ids, 0).astype(np.int32)
    # compact the cell labels
    ids, inverse = np.unique(truth, return_inverse=True)
    truth = inverse.reshape(H, W).astype(np.int32)

    clean = np.where(cell_mask, cell_level, grout_level)
    noisy = np.clip(clean + rng.normal(0.0, noise_sigma, size=(H, W)), 0.0, 1.0)
    return SyntheticScene(
        image=Image(noisy[:, :, None], "gray"),
        truth=LabelMap(truth),
        n_objects=int(truth.max()),
        noise_sigma=noise_sigma,
    )


def generate_panels(
    seed: int,
    count: int,
    size=(160, 160),
    noise_sigma: float = 0.03,
) -> SyntheticScene:
    """Collage of ``count`` rectangular panels tiling the canvas.

    Gray levels come from two pools separated by a 0.2 dead zone and are
    dealt to the grid in checkerboard parity (shuffled within each pool), so
    4-adjacent panels always differ by at least 0.2 while same-pool levels
    stay distinct after 8-bit quantization.  Truth labels are 0..count-1;
    there is no background.
    """
    H, W = size
    rng = np.random.default_rng(seed)
    rows = max(1, round(math.sqrt(count)))
    while count % rows and rows > 1:
        rows -= 1
    cols = count // rows

    half = (count + 1) // 2
    low = np.linspace(0.05, 0.40, half)[rng.permutation(half)]
    high = np.linspace(0.60, 0.95, max(1, count - half))[
        rng.permutation(max(1, count - half))
    ]
    assignment = np.empty(count)
    li = hi = 0
    for idx in range(count):
        rr, cc = divmod(idx, cols)
        if (rr + cc) % 2 == 0:
            if li < low.size:
                assignment[idx] = low[li]
                li += 1
            else:
                assignment[idx] = high[hi]
                hi += 1
        else:
            if hi < high.size:
                assignment[idx] = high[hi]
                hi += 1
            else:
                assignment[idx] = low[li]
                li += 1

    row_edges = np.linspace(0, H, rows + 1).astype(int)
    col_edges = np.linspace(0, W, cols + 1).astype(int)
    clean = np.empty((H, W))
    truth = np.empty((H, W), dtype=np.int32)
    for idx in range(count):
        rr, cc = divmod(idx, cols)
        ys = slice(row_edges[rr], row_edges[rr + 1])
        xs = slice(col_edges[cc], col_edges[cc + 1])
        clean[ys, xs] = assignment[idx]
        truth[ys, xs] = idx
    noisy = np.clip(clean + rng.normal(0.0, noise_sigma, size=(H, W)), 0.0, 1.0)
    return SyntheticScene(
        image=Image(noisy[:, :, None], "gray"),
        truth=LabelMap(truth),
        n_objects=count,
        noise_sigma=noise_sigma,
    )
