"""Power-SLIC oversegmentation.

Phase 1 is SLIC: cluster centers seeded on a regular grid with spacing
``h = sqrt(N/m)``, pixels assigned to the nearest center under
``dist^2 = ||x_p - x_s||^2 + (h^2/alpha^2) ||I(x_p) - I(x_s)||^2`` within a
2h x 2h spatial window, centers updated to cluster centroids each sweep.
Phase 2 fits one anisotropic generator per cluster (spatial covariance,
inverted with a small ridge) and relabels every pixel by the minimal
ellipsoidal power score; a connectivity pass absorbs undersized fragments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .image import Image, LabelMap

UNIT_DISK_AREA = math.pi  # volume of the unit ball in d = 2


@dataclass(frozen=True)
class SlicConfig:
    """m: target superpixel count; alpha: compactness; iterations: sweeps.

    color_scale maps the stored unit-range channels onto the color units the
    compactness convention assumes (CIELAB-like, L in [0, 100]); alpha = 10
    balances spatial and color terms on that scale.  Set color_scale = 1 to
    apply the distance formula to the stored values verbatim.
    """

    m: int
    alpha: float = 10.0
    iterations: int = 10
    color_scale: float = 100.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.color_scale <= 0:
            raise ValueError("color_scale must be positive")


@dataclass(frozen=True)
class Generator:
    """Power-diagram site: center, inverse-covariance matrix, additive weight."""

    center: np.ndarray  # (2,) [y, x]
    shape_inv: np.ndarray  # (2, 2) symmetric positive definite
    weight: float
    size: int


def _seed_grid(height, width, m):
    """Initial cluster centers: one per cell of an aspect-respecting grid.

    rows * cols never exceeds m, so at most m clusters are seeded."""
    n = height * width
    h = math.sqrt(n / m)
    rows = max(1, min(m, round(math.sqrt(m * height / width)) or 1, height))
    cols = max(1, min(m // rows, width))
    ys = (np.arange(rows) + 0.5) * (height / rows) - 0.5
    xs = (np.arange(cols) + 0.5) * (width / cols) - 0.5
    grid = np.stack(np.meshgrid(ys, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    return grid, h


def _global_assign(feat, centers, color_weight, pixels):
    """Full-scan assignment for pixels missed by every window (rare)."""
    ys = pixels // feat.shape[1]
    xs = pixels % feat.shape[1]
    cols = feat.reshape(-1, feat.shape[2])[pixels]
    best = np.full(pixels.size, np.inf)
    lab = np.zeros(pixels.size, dtype=np.int32)
    for j in range(centers.shape[0]):
        dy = ys - centers[j, 0]
        dx = xs - centers[j, 1]
        diff = cols - centers[j, 2:]
        d2 = ((dy * dy) + (dx * dx)) + color_weight * (diff * diff).sum(axis=1)
        upd = d2 < best
        best[upd] = d2[upd]
        lab[upd] = j
    return lab, best


def slic_phase1(img: Image, cfg: SlicConfig, return_objectives: bool = False):
    """SLIC sweeps; returns (labels, centers) for the surviving clusters.

    labels is (H, W) int32 with ids 0..m'-1; centers is (m', 2+C) rows of
    [y, x, color...].  With ``return_objectives`` the per-sweep assignment
    objectives (sum of dist^2) are appended to the result.
    """
    H, W = img.height, img.width
    N = H * W
    if cfg.m > N:
        raise ValueError(f"m={cfg.m} exceeds pixel count {N}")
    if cfg.color_scale == 1.0:
        feat = img.data
    else:
        feat = np.ascontiguousarray(img.data * cfg.color_scale)
    spatial, h = _seed_grid(H, W, cfg.m)
    seed_y = np.clip(np.rint(spatial[:, 0]), 0, H - 1).astype(np.intp)
    seed_x = np.clip(np.rint(spatial[:, 1]), 0, W - 1).astype(np.intp)
    centers = np.concatenate([spatial, feat[seed_y, seed_x, :]], axis=1)
    color_weight = (h * h) / (cfg.alpha * cfg.alpha)
    window = int(math.ceil(h))
    objectives = []

    labels = None
    for _ in range(cfg.iterations):
        labels, dists = _kernels.slic_assign(feat, centers, window, color_weight)
        flat = labels.reshape(-1)
        missed = np.flatnonzero(flat < 0)
        if missed.size:
            lab, best = _global_assign(feat, centers, color_weight, missed)
            flat[missed] = lab
            dists.reshape(-1)[missed] = best
        if return_objectives:
            objectives.append(float(dists.sum()))
        # centroid update (empty clusters keep their previous center)
        counts = np.bincount(flat, minlength=centers.shape[0]).astype(np.float64)
        ys = np.bincount(flat, weights=_row_coords(H, W), minlength=centers.shape[0])
        xs = np.bincount(flat, weights=_col_coords(H, W), minlength=centers.shape[0])
        nonempty = counts > 0
        centers[nonempty, 0] = ys[nonempty] / counts[nonempty]
        centers[nonempty, 1] = xs[nonempty] / counts[nonempty]
        for c in range(feat.shape[2]):
            sums = np.bincount(
                flat, weights=feat[:, :, c].reshape(-1), minlength=centers.shape[0]
            )
            centers[nonempty, 2 + c] = sums[nonempty] / counts[nonempty]

    counts = np.bincount(labels.reshape(-1), minlength=centers.shape[0])
    survivors = np.flatnonzero(counts > 0)
    remap = np.full(centers.shape[0], -1, dtype=np.int32)
    remap[survivors] = np.arange(survivors.size, dtype=np.int32)
    labels = remap[labels]
    centers = centers[survivors]
    if return_objectives:
        return labels, centers, objectives
    return labels, centers


def _row_coords(H, W):
    return np.repeat(np.arange(H, dtype=np.float64), W)


def _col_coords(H, W):
    return np.tile(np.arange(W, dtype=np.float64), H)


def fit_generators(labels: np.ndarray, n_clusters: int) -> list:
    """Spatial covariance fit per cluster plus the heuristic power weight.

    The weight is (|C| / kappa_d * sqrt(det A))^(2/d) with d = 2 and
    kappa_2 = pi; the covariance ridge eps = 1e-6 * trace(Sigma)/d + 1e-9
    keeps singleton and collinear clusters invertible.
    """
    H, W = labels.shape
    flat = labels.reshape(-1)
    counts = np.bincount(flat, minlength=n_clusters).astype(np.float64)
    if (counts == 0).any():
        raise ValueError("every cluster must be nonempty")
    ys = _row_coords(H, W)
    xs = _col_coords(H, W)
    sy = np.bincount(flat, weights=ys, minlength=n_clusters)
    sx = np.bincount(flat, weights=xs, minlength=n_clusters)
    syy = np.bincount(flat, weights=ys * ys, minlength=n_clusters)
    sxx = np.bincount(flat, weights=xs * xs, minlength=n_clusters)
    syx = np.bincount(flat, weights=ys * xs, minlength=n_clusters)
    my = sy / counts
    mx = sx / counts
    cyy = syy / counts - my * my
    cxx = sxx / counts - mx * mx
    cyx = syx / counts - my * mx
    gens = []
    for j in range(n_clusters):
        sigma = np.array([[cyy[j], cyx[j]], [cyx[j], cxx[j]]])
        eps = 1e-6 * (sigma[0, 0] + sigma[1, 1]) / 2.0 + 1e-9
        a = np.linalg.inv(sigma + eps * np.eye(2))
        a = (a + a.T) / 2.0
        size = int(counts[j])
        gens.append(
            Generator(
                center=np.array([my[j], mx[j]]),
                shape_inv=a,
                weight=power_weight(size, a),
                size=size,
            )
        )
    return gens


def power_weight(size: int, shape_inv: np.ndarray, d: int = 2) -> float:
    """The heuristic weight recomputed from a generator's stored fields."""
    kappa = UNIT_DISK_AREA if d == 2 else math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return float((size / kappa * math.sqrt(np.linalg.det(shape_inv))) ** (2.0 / d))


def _gen_matrix(gens) -> np.ndarray:
    rows = np.empty((len(gens), 6))
    for j, g in enumerate(gens):
        rows[j] = [
            g.center[0],
            g.center[1],
            g.shape_inv[0, 0],
            g.shape_inv[0, 1],
            g.shape_inv[1, 1],
            g.weight,
        ]
    return rows


def _power_score_points(points, gmat):
    dy = points[:, 0:1] - gmat[:, 0]
    dx = points[:, 1:2] - gmat[:, 1]
    return (
        (gmat[:, 2] * (dy * dy))
        + (gmat[:, 4] * (dx * dx))
        + (2.0 * gmat[:, 3]) * (dy * dx)
    ) - gmat[:, 5]


def assign_power_diagram(shape, gens, window: int | None = None) -> LabelMap:
    """Label each pixel by the minimal power score; ties keep the lowest index.

    Scores are evaluated inside a 3h window per generator (h from the mean
    generator size); pixels missed by every window get a full scan.  Pass an
    explicit ``window`` (e.g. max(H, W)) to force exhaustive evaluation.
    """
    if not gens:
        raise ValueError("need at least one generator")
    H, W = shape
    gmat = _gen_matrix(gens)
    if window is None:
        h = math.sqrt(H * W / len(gens))
        window = int(math.ceil(1.5 * h))
    labels, _ = _kernels.power_assign((H, W), gmat, window)
    flat = labels.reshape(-1)
    missed = np.flatnonzero(flat < 0)
    if missed.size:
        pts = np.stack(
            [(missed // W).astype(np.float64), (missed % W).astype(np.float64)], axis=1
        )
        scores = _power_score_points(pts, gmat)
        flat[missed] = np.argmin(scores, axis=1).astype(np.int32)
    return LabelMap(labels)


def enforce_connectivity(lm: LabelMap, min_size: int | None = None) -> LabelMap:
    """Split disconnected labels, absorb undersized fragments, compact ids.

    Components smaller than ``min_size`` are merged into the neighboring
    component sharing the longest boundary (smallest component first; ties
    prefer the lower component id).  Defaults to N / (4m).
    """
    labels = lm.labels
    comps, count = _kernels.label_components(labels)
    if min_size is None:
        m = len(np.unique(labels))
        min_size = max(1, int(labels.size / (4 * m)))
    sizes = np.bincount(comps.reshape(-1), minlength=count).astype(np.int64)

    # boundary length between 4-adjacent component pairs
    pairs = {}
    for a, b in (
        (comps[:, :-1].reshape(-1), comps[:, 1:].reshape(-1)),
        (comps[:-1, :].reshape(-1), comps[1:, :].reshape(-1)),
    ):
        diff = a != b
        lo = np.minimum(a[diff], b[diff]).astype(np.int64)
        hi = np.maximum(a[diff], b[diff]).astype(np.int64)
        enc, cnt = np.unique(lo * count + hi, return_counts=True)
        for e, c in zip(enc.tolist(), cnt.tolist()):
            pairs[e] = pairs.get(e, 0) + c

    neighbors = [dict() for _ in range(count)]
    for e, c in pairs.items():
        lo, hi = divmod(e, count)
        neighbors[lo][hi] = neighbors[lo].get(hi, 0) + c
        neighbors[hi][lo] = neighbors[hi].get(lo, 0) + c

    parent = np.arange(count, dtype=np.int64)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def live_neighbors(c):
        # consolidate stale keys onto live roots
        out = {}
        for nb, length in neighbors[c].items():
            nb = find(nb)
            if nb != c:
                out[nb] = out.get(nb, 0) + length
        neighbors[c] = out
        return out

    changed = True
    while changed:
        changed = False
        order = sorted(
            (int(sizes[c]), c)
            for c in range(count)
            if find(c) == c and sizes[c] < min_size
        )
        for _, c in order:
            if find(c) != c or sizes[c] >= min_size:
                continue
            nbs = live_neighbors(c)
            if not nbs:
                continue
            # longest shared boundary, ties to the lowest component id
            target = min(nbs.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            parent[c] = target
            sizes[target] += sizes[c]
            for nb, length in nbs.items():
                if nb != target:
                    neighbors[target][nb] = neighbors[target].get(nb, 0) + length
                    neighbors[nb][target] = neighbors[nb].get(target, 0) + length
            neighbors[c] = {}
            changed = True

    roots = np.array([find(c) for c in range(count)], dtype=np.int64)
    merged_labels = roots[comps]
    # renumber by first row-major occurrence for determinism
    flat = merged_labels.reshape(-1)
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return LabelMap(rank[inverse].reshape(labels.shape).astype(np.int32))


def power_slic(img: Image, cfg: SlicConfig) -> LabelMap:
    """Full Power-SLIC pipeline: SLIC sweeps, generator fit, power diagram,
    connectivity enforcement.  Returns m' <= m connected superpixels."""
    labels, centers = slic_phase1(img, cfg)
    gens = fit_generators(labels, centers.shape[0])
    lm = assign_power_diagram((img.height, img.width), gens)
    return enforce_connectivity(lm, min_size=max(1, int(img.pixel_count / (4 * cfg.m))))
