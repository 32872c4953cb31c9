"""Region-adjacency graph and greedy merge optimization.

A merge between adjacent regions is keyed by the regularized cost
``kappa = E - het_i - het_j`` where E is the squared 2-Wasserstein distance
between the regions' histograms and ``het`` is each region's heterogeneity:
zero initially, then the cost of its most recent merge.  The priority queue
uses lazy deletion: popped entries are validated only by both endpoints
being alive, and keys of untouched entries are never refreshed.  Whenever a
region wins a merge, the distances to all of its neighbors are recomputed
and fresh entries inserted, so the stored per-edge distances are always
current at pop time.

Ties are broken deterministically by (key, min(i, j), max(i, j)); the winner
keeps the id of the entry's first region.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleTargetError, MarkerConflictError, MarkerError
from .histograms import Palette
from .image import LabelMap
from .ot import pairwise_sq_dists, wasserstein2_sq_weights


@dataclass(frozen=True)
class MergeRecord:
    winner: int
    loser: int
    cost: float  # squared Wasserstein distance of the merged pair
    kappa: float  # cost - het_winner - het_loser at merge time
    regions: int  # region count after this merge


@dataclass(frozen=True)
class MergeTrace:
    records: tuple
    cumulative_energy: float
    initial_regions: int

    def level_costs(self) -> dict:
        """Map r -> cost of the merge that reduced the partition to r."""
        return {rec.regions: rec.cost for rec in self.records}

    def to_csv(self) -> str:
        lines = ["r,winner,loser,E,kappa,LT"]
        for rec in self.records:
            lines.append(
                f"{rec.regions},{rec.winner},{rec.loser},"
                f"{rec.cost!r},{rec.kappa!r},{rec.cost!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "initial_regions": self.initial_regions,
                "cumulative_energy": self.cumulative_energy,
                "records": [
                    {
                        "r": rec.regions,
                        "winner": rec.winner,
                        "loser": rec.loser,
                        "E": rec.cost,
                        "kappa": rec.kappa,
                        "LT": rec.cost,
                    }
                    for rec in self.records
                ],
            }
        )


@dataclass(frozen=True)
class MarkerSet:
    """User seeds: (x, y, class) triples with at least one point per class."""

    points: tuple

    def __post_init__(self):
        pts = tuple((int(x), int(y), str(c)) for x, y, c in self.points)
        if not pts:
            raise MarkerError("marker set is empty")
        object.__setattr__(self, "points", pts)

    @property
    def classes(self) -> tuple:
        return tuple(sorted({c for _, _, c in self.points}))

    @property
    def n_classes(self) -> int:
        return len(self.classes)


@dataclass
class RegionGraph:
    """Mutable merge state over an initial superpixel partition."""

    base_labels: np.ndarray  # (H, W) int32, compact initial superpixel ids
    counts: np.ndarray  # (m, k) int64 bin counts per live region
    areas: np.ndarray  # (m,) int64
    het: np.ndarray  # (m,) float64 heterogeneity values
    adj: list  # list[set[int]] over live ids
    alive: np.ndarray  # (m,) bool
    marker_classes: list  # list[set[str]]
    marker_refs: dict  # class -> (counts, area), frozen reference regions
    palette: Palette
    parent: np.ndarray  # union-find: initial id -> current region id
    cost_matrix: np.ndarray  # (k, k) squared center distances

    @property
    def num_live(self) -> int:
        return int(self.alive.sum())

    def live_ids(self):
        return [int(i) for i in np.flatnonzero(self.alive)]

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = int(self.parent[i])
        return i

    def copy(self) -> "RegionGraph":
        return RegionGraph(
            base_labels=self.base_labels,
            counts=self.counts.copy(),
            areas=self.areas.copy(),
            het=self.het.copy(),
            adj=[set(s) for s in self.adj],
            alive=self.alive.copy(),
            marker_classes=[set(s) for s in self.marker_classes],
            marker_refs=dict(self.marker_refs),
            palette=self.palette,
            parent=self.parent.copy(),
            cost_matrix=self.cost_matrix,
        )

    def components(self) -> int:
        """Connected components of the live adjacency graph."""
        seen = set()
        comps = 0
        for start in self.live_ids():
            if start in seen:
                continue
            comps += 1
            stack = [start]
            seen.add(start)
            while stack:
                node = stack.pop()
                for nb in self.adj[node]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
        return comps

    def label_map(self):
        """Current partition as a compact LabelMap plus the live roots in
        ascending id order (compact id -> root id)."""
        m = self.parent.size
        roots = np.array([self.find(i) for i in range(m)], dtype=np.int64)
        live_roots = sorted(set(roots.tolist()))
        remap = np.full(m, -1, dtype=np.int32)
        for new, root in enumerate(live_roots):
            remap[root] = new
        return LabelMap(remap[roots[self.base_labels]]), live_roots

    def region_weights(self, i: int) -> np.ndarray:
        return self.counts[i] / self.areas[i]

    def edge_cost(self, i: int, j: int) -> float:
        """Squared Wasserstein distance between two live regions."""
        return wasserstein2_sq_weights(
            self.region_weights(i), self.region_weights(j), self.cost_matrix
        )


def merge_cost(edge_cost: float, het_i: float, het_j: float) -> float:
    """Regularized merge cost; may be negative."""
    return edge_cost - het_i - het_j


def build_rag(lm: LabelMap, stats: list, pal: Palette) -> RegionGraph:
    """Region-adjacency graph of a compact label map: edge (i, j) iff some
    pixel of i is 4-adjacent to some pixel of j."""
    labels = lm.labels
    m = int(labels.max()) + 1
    if len(stats) != m:
        raise ValueError(f"{len(stats)} stats for {m} labels")
    counts = np.stack([s.counts for s in stats]).astype(np.int64)
    areas = np.array([s.area for s in stats], dtype=np.int64)
    adj = [set() for _ in range(m)]
    for a, b in (
        (labels[:, :-1].reshape(-1), labels[:, 1:].reshape(-1)),
        (labels[:-1, :].reshape(-1), labels[1:, :].reshape(-1)),
    ):
        diff = a != b
        lo = np.minimum(a[diff], b[diff]).astype(np.int64)
        hi = np.maximum(a[diff], b[diff]).astype(np.int64)
        for e in np.unique(lo * m + hi).tolist():
            i, j = divmod(e, m)
            adj[i].add(j)
            adj[j].add(i)
    return RegionGraph(
        base_labels=labels,
        counts=counts,
        areas=areas,
        het=np.zeros(m),
        adj=adj,
        alive=np.ones(m, dtype=bool),
        marker_classes=[set() for _ in range(m)],
        marker_refs={},
        palette=pal,
        parent=np.arange(m, dtype=np.int64),
        cost_matrix=pairwise_sq_dists(pal.centers),
    )


def marker_dissimilarity(i: int, j: int, g: RegionGraph, pal: Palette = None) -> float:
    """Marker-aware dissimilarity.

    If the union of the two regions carries markers of exactly one class,
    both regions are compared against that class's frozen reference region;
    otherwise the reference is region i itself, and the value reduces to the
    plain squared distance between i and j.
    """
    if not (g.alive[i] and g.alive[j]):
        raise ValueError(f"regions {i}, {j} must both be alive")
    union = g.marker_classes[i] | g.marker_classes[j]
    if len(union) == 1:
        ref_counts, ref_area = g.marker_refs[next(iter(union))]
        ref_w = ref_counts / ref_area
        return wasserstein2_sq_weights(
            g.region_weights(i), ref_w, g.cost_matrix
        ) + wasserstein2_sq_weights(g.region_weights(j), ref_w, g.cost_matrix)
    return g.edge_cost(i, j)


def _greedy_merge(g, n_target, key_fn, allowed_fn=None, stop_on_empty=False):
    """Shared merge loop; mutates g and returns the list of MergeRecords."""
    heap = []
    emap = {}
    live = g.live_ids()
    for i in live:
        for j in sorted(g.adj[i]):
            if j > i:
                e = key_fn(i, j)
                emap[(i, j)] = e
                heapq.heappush(heap, (e - g.het[i] - g.het[j], i, j, i, j))
    r = len(live)
    records = []
    while r > n_target and heap:
        _, lo, hi, i, j = heapq.heappop(heap)
        if not (g.alive[i] and g.alive[j]):
            continue
        if allowed_fn is not None and not allowed_fn(i, j):
            continue
        e = emap[(lo, hi)]
        kappa = float(e - g.het[i] - g.het[j])
        # merge j into i
        g.alive[j] = False
        g.parent[j] = i
        g.counts[i] += g.counts[j]
        g.areas[i] += g.areas[j]
        g.marker_classes[i] |= g.marker_classes[j]
        for nb in g.adj[j]:
            g.adj[nb].discard(j)
            if nb != i:
                g.adj[nb].add(i)
        g.adj[i] |= g.adj[j]
        g.adj[i].discard(i)
        g.adj[i].discard(j)
        g.adj[j] = set()
        g.het[i] = e
        r -= 1
        records.append(
            MergeRecord(winner=i, loser=j, cost=e, kappa=kappa, regions=r)
        )
        for nb in sorted(g.adj[i]):
            e2 = key_fn(i, nb)
            lo2, hi2 = (i, nb) if i < nb else (nb, i)
            emap[(lo2, hi2)] = e2
            heapq.heappush(heap, (e2 - g.het[i] - g.het[nb], lo2, hi2, i, nb))
    if r > n_target and not stop_on_empty:
        raise InfeasibleTargetError(
            f"queue exhausted at {r} regions before reaching {n_target}"
        )
    return records


def run_unsupervised(g: RegionGraph, n: int, pal: Palette = None):
    """Greedy merging down to exactly n regions.

    Returns (LabelMap, MergeTrace); the input graph is not modified.
    """
    g = g.copy()
    m = g.num_live
    if not 1 <= n <= m:
        raise InfeasibleTargetError(f"target n={n} outside [1, {m}]")
    comps = g.components()
    if n < comps:
        raise InfeasibleTargetError(
            f"adjacency graph has {comps} components; cannot reach n={n}"
        )
    records = _greedy_merge(g, n, key_fn=g.edge_cost)
    lm, _ = g.label_map()
    trace = MergeTrace(
        records=tuple(records),
        cumulative_energy=float(sum(rec.kappa for rec in records)),
        initial_regions=m,
    )
    return lm, trace


def seed_markers(g: RegionGraph, markers: MarkerSet) -> None:
    """Attach marker classes to initial superpixels and freeze the per-class
    reference regions.  Raises MarkerConflictError if one superpixel receives
    two classes."""
    H, W = g.base_labels.shape
    seeded = {}
    for x, y, cls in markers.points:
        if not (0 <= x < W and 0 <= y < H):
            raise MarkerError(f"marker ({x}, {y}) outside {W}x{H} image")
        sp = int(g.base_labels[y, x])
        prior = seeded.get(sp)
        if prior is not None and prior != cls:
            raise MarkerConflictError(
                f"superpixel {sp} received classes {prior!r} and {cls!r}"
            )
        seeded[sp] = cls
    for sp, cls in seeded.items():
        g.marker_classes[sp].add(cls)
    for cls in markers.classes:
        ids = sorted(sp for sp, c in seeded.items() if c == cls)
        ref_counts = g.counts[ids].sum(axis=0)
        ref_area = int(g.areas[ids].sum())
        g.marker_refs[cls] = (ref_counts, ref_area)


def run_marker(
    g: RegionGraph, markers: MarkerSet, pal: Palette = None, return_trace: bool = False
):
    """Class-consistent merging guided by markers.

    Stops when the region count reaches the number of classes or the queue
    drains; no output region ever carries two marker classes.  Returns
    (LabelMap, region_classes) where region_classes[i] is the class of
    compact region i or None; with ``return_trace`` the merge records are
    appended to the result.
    """
    g = g.copy()
    seed_markers(g, markers)
    n = markers.n_classes

    def key_fn(i, j):
        return marker_dissimilarity(i, j, g)

    def allowed(i, j):
        return len(g.marker_classes[i] | g.marker_classes[j]) <= 1

    records = _greedy_merge(g, n, key_fn=key_fn, allowed_fn=allowed, stop_on_empty=True)
    lm, live_roots = g.label_map()
    region_classes = []
    for root in live_roots:
        classes = g.marker_classes[root]
        region_classes.append(next(iter(classes)) if classes else None)
    if return_trace:
        return lm, region_classes, tuple(records)
    return lm, region_classes


def class_label_map(lm: LabelMap, region_classes, class_order=None):
    """Integer class map: 0 for unassigned, 1.. for classes (sorted order)."""
    if class_order is None:
        class_order = sorted({c for c in region_classes if c is not None})
    mapping = {cls: idx + 1 for idx, cls in enumerate(class_order)}
    lut = np.zeros(int(lm.labels.max()) + 1, dtype=np.int32)
    for region, cls in enumerate(region_classes):
        lut[region] = mapping.get(cls, 0)
    return LabelMap(lut[lm.labels]), mapping


def energy(trace: MergeTrace) -> float:
    """Total regularized energy of the recorded merge sequence."""
    return float(sum(rec.kappa for rec in trace.records))


@dataclass(frozen=True)
class RocResult:
    points: tuple  # (r, value) ascending in r
    undefined: tuple  # r values where LT(r) = 0
    maxima: tuple  # (r, value) ranked by value desc, then r asc

    def top(self, count: int) -> list:
        return [r for r, _ in self.maxima[:count]]


def compute_roc(trace: MergeTrace) -> RocResult:
    """Relative change of the merge-cost curve: (LT(r-1) - LT(r)) / LT(r).

    Local maxima are values strictly greater than both neighbors within each
    run of consecutive defined r; plateaus report their smallest r.
    """
    if len(trace.records) < 2:
        raise ValueError("trace too short for ROC analysis")
    lt = trace.level_costs()
    points = []
    undefined = []
    for r in sorted(lt):
        if r - 1 not in lt:
            continue
        if lt[r] > 0.0:
            points.append((r, (lt[r - 1] - lt[r]) / lt[r]))
        else:
            undefined.append(r)
    maxima = []
    # split into runs of consecutive r so undefined gaps break neighborhoods
    run = []
    for idx, (r, val) in enumerate(points):
        if run and r != run[-1][0] + 1:
            maxima.extend(_local_maxima(run))
            run = []
        run.append((r, val))
    maxima.extend(_local_maxima(run))
    maxima.sort(key=lambda rv: (-rv[1], rv[0]))
    return RocResult(points=tuple(points), undefined=tuple(undefined), maxima=tuple(maxima))


def _local_maxima(run):
    """Interior strict local maxima of one consecutive run; plateaus yield
    their smallest r."""
    out = []
    n = len(run)
    idx = 1
    while idx < n - 1:
        r, val = run[idx]
        if val <= run[idx - 1][1]:
            idx += 1
            continue
        # extend over a plateau of equal values
        end = idx
        while end + 1 < n and run[end + 1][1] == val:
            end += 1
        if end < n - 1 and run[end + 1][1] < val:
            out.append((r, val))
        idx = end + 1
    return out


def partition_at(superpixels: LabelMap, trace: MergeTrace, r: int) -> LabelMap:
    """Partition with r regions obtained by replaying the first
    initial_regions - r merges of the trace (equivalently, undoing the final
    merges of a full run)."""
    if not 1 <= r <= trace.initial_regions:
        raise ValueError(f"r={r} outside [1, {trace.initial_regions}]")
    take = trace.initial_regions - r
    if take > len(trace.records):
        raise ValueError(f"trace only reaches r={trace.initial_regions - len(trace.records)}")
    m = int(superpixels.labels.max()) + 1
    parent = np.arange(m, dtype=np.int64)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = int(parent[i])
        return i

    for rec in trace.records[:take]:
        parent[find(rec.loser)] = find(rec.winner)
    roots = np.array([find(i) for i in range(m)], dtype=np.int64)
    live_roots = sorted(set(roots.tolist()))
    remap = np.full(m, -1, dtype=np.int32)
    for new, root in enumerate(live_roots):
        remap[root] = new
    return LabelMap(remap[roots[superpixels.labels]])
