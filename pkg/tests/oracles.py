"""Independent oracles used by the test suite.

Everything here deliberately avoids the library's own solver paths: the
transportation oracle enumerates transportation-polytope vertices via
spanning trees of the complete bipartite graph, the CIELAB reference is a
scalar re-derivation of the published formulas, and the greedy-merge shadow
recomputes every step from scratch with plain dictionaries.
"""

import itertools

import numpy as np

# ---------------------------------------------------------------------------
# Transportation-polytope vertex enumeration
# ---------------------------------------------------------------------------

_COMBO_CACHE = {}
_SHAPE_CACHE = {}


def _combos_small(n, k):
    key = (n, k)
    if key not in _COMBO_CACHE:
        _COMBO_CACHE[key] = np.array(
            list(itertools.combinations(range(n), k)), dtype=np.int64
        ).reshape(-1, k)
    return _COMBO_CACHE[key]


def _compositions(total, parts, max_part):
    out = []

    def rec(rem, left, cur):
        if left == 1:
            if 1 <= rem <= max_part:
                out.append(cur + [rem])
            return
        for d in range(1, min(max_part, rem - (left - 1)) + 1):
            rec(rem - d, left - 1, cur + [d])

    rec(total, parts, [])
    return out


def spanning_trees(a, b):
    """All spanning trees of K_{a,b} as flat edge ids i*b+j, one row per tree.

    Counts match Scoins' formula a^(b-1) * b^(a-1).
    """
    if a == 1 or b == 1:
        return np.arange(a * b, dtype=np.int64)[None, :]
    n_nodes = a + b
    k = n_nodes - 1
    blocks = []
    for comp in _compositions(k, a, b):
        tabs = [_combos_small(b, d) for d in comp]
        sizes = [t.shape[0] for t in tabs]
        grid = np.indices(sizes).reshape(a, -1)
        edges = np.concatenate(
            [i * b + tabs[i][grid[i]] for i in range(a)], axis=1
        )
        blocks.append(edges)
    combos = np.concatenate(blocks, axis=0)
    rows = combos // b
    cols = combos % b
    cmask = np.bitwise_or.reduce(1 << cols, axis=1)
    keep = cmask == (1 << b) - 1
    combos, rows, cols = combos[keep], rows[keep], cols[keep] + a
    T = combos.shape[0]
    parent = np.broadcast_to(np.arange(n_nodes, dtype=np.int64), (T, n_nodes)).copy()
    idx = np.arange(T)
    alive = np.ones(T, dtype=bool)

    def find(node):
        r = node.copy()
        for _ in range(n_nodes):
            p = parent[idx, r]
            if np.array_equal(p, r):
                break
            r = p
        return r

    for e in range(k):
        ru = find(rows[:, e])
        rv = find(cols[:, e])
        alive &= ru != rv
        parent[idx, np.maximum(ru, rv)] = np.minimum(ru, rv)
    return combos[alive]


def _build_schedule(tr, a, b):
    """Per-tree leaf-elimination order so tree flows solve in k vector steps."""
    T, k = tr.shape
    n = a + b
    rows = (tr // b).astype(np.int64)
    cols = (tr % b + a).astype(np.int64)
    flat = np.arange(T)[:, None] * n
    deg = (
        np.bincount((flat + rows).ravel(), minlength=T * n)
        + np.bincount((flat + cols).ravel(), minlength=T * n)
    ).reshape(T, n)
    eliminated = np.zeros((T, k), dtype=bool)
    elim_node = np.empty((T, k), dtype=np.int64)
    elim_other = np.empty((T, k), dtype=np.int64)
    elim_pos = np.empty((T, k), dtype=np.int64)
    tt = np.arange(T)
    for s in range(k):
        leaf = np.argmax(deg == 1, axis=1)
        match = ((rows == leaf[:, None]) | (cols == leaf[:, None])) & ~eliminated
        pos = np.argmax(match, axis=1)
        r_at = rows[tt, pos]
        c_at = cols[tt, pos]
        other = np.where(r_at == leaf, c_at, r_at)
        eliminated[tt, pos] = True
        deg[tt, leaf] = 0
        deg[tt, other] -= 1
        elim_node[:, s] = leaf
        elim_other[:, s] = other
        elim_pos[:, s] = pos
    tr_sched = tr[tt[:, None], elim_pos]
    base = np.arange(T)[:, None] * n
    return tr_sched, (elim_node + base).T.copy(), (elim_other + base).T.copy()


def _shape_tables(a, b):
    key = (a, b)
    if key not in _SHAPE_CACHE:
        tr = spanning_trees(a, b)
        tr_sched, idx_node, idx_other = _build_schedule(tr, a, b)
        _SHAPE_CACHE[key] = (
            tr_sched,
            idx_node,
            idx_other,
            np.empty((tr.shape[0], a + b)),
        )
    return _SHAPE_CACHE[key]


def min_cost_by_vertex_enumeration(supply, demand, cost, tol=1e-9):
    """Exhaustive minimum over all basic feasible solutions (vertices).

    Every spanning tree of K_{a,b} determines a unique flow satisfying the
    marginals; feasible ones (all flows >= -tol*scale) are exactly the
    polytope's vertices, and the minimum objective over them equals the LP
    optimum.
    """
    supply = np.asarray(supply, dtype=np.float64)
    demand = np.asarray(demand, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    a, b = cost.shape
    tr_sched, idx_node, idx_other, rem = _shape_tables(a, b)
    T, k = tr_sched.shape
    rhs = np.concatenate([supply, demand])
    rem[:] = rhs[None, :]
    scale = max(float(supply.sum()), 1.0)
    cost_sched = cost.reshape(-1)[tr_sched]
    obj = np.zeros(T)
    feas = np.ones(T, dtype=bool)
    flat = rem.reshape(-1)
    for s in range(k):
        f = flat[idx_node[s]]
        feas &= f >= -tol * scale
        flat[idx_other[s]] -= f
        obj += f * cost_sched[:, s]
    return float(obj[feas].min())


def wasserstein2_sq_bruteforce(wu, wv, centers, tol=1e-9):
    """Squared 2-Wasserstein distance by vertex enumeration on the support."""
    wu = np.asarray(wu, dtype=np.float64)
    wv = np.asarray(wv, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim == 1:
        centers = centers[:, None]
    si = np.flatnonzero(wu > 0)
    sj = np.flatnonzero(wv > 0)
    v = wu[si] / wu[si].sum()
    w = wv[sj] / wv[sj].sum()
    diff = centers[si][:, None, :] - centers[sj][None, :, :]
    cost = (diff * diff).sum(axis=2)
    return min_cost_by_vertex_enumeration(v, w, cost, tol=tol)


# ---------------------------------------------------------------------------
# CIELAB reference (scalar, straight from the published formulas)
# ---------------------------------------------------------------------------

def srgb_to_lab_reference(r, g, b):
    def linearize(c):
        return ((c + 0.055) / 1.055) ** 2.4 if c > 0.04045 else c / 12.92

    rl, gl, bl = linearize(r), linearize(g), linearize(b)
    x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl
    y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl
    z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl
    xr, yr, zr = x / 0.95047, y / 1.0, z / 1.08883
    eps = 216.0 / 24389.0
    kappa = 24389.0 / 27.0

    def f(t):
        return t ** (1.0 / 3.0) if t > eps else (kappa * t + 16.0) / 116.0

    fx, fy, fz = f(xr), f(yr), f(zr)
    return 116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)


# ---------------------------------------------------------------------------
# Misc small oracles
# ---------------------------------------------------------------------------

def nearest_center_labels(shape, centers):
    """Brute-force nearest-center (Voronoi) labeling, lowest index on ties."""
    H, W = shape
    ys, xs = np.mgrid[0:H, 0:W]
    best = np.full((H, W), np.inf)
    lab = np.zeros((H, W), dtype=np.int32)
    for j, (cy, cx) in enumerate(centers):
        d = (ys - cy) ** 2 + (xs - cx) ** 2
        upd = d < best
        best[upd] = d[upd]
        lab[upd] = j
    return lab


def adjacency_bruteforce(labels):
    """All unordered 4-adjacent label pairs by scanning every pixel pair."""
    H, W = labels.shape
    pairs = set()
    for y in range(H):
        for x in range(W):
            for dy, dx in ((0, 1), (1, 0)):
                yy, xx = y + dy, x + dx
                if yy < H and xx < W and labels[y, x] != labels[yy, xx]:
                    pairs.add(
                        (min(labels[y, x], labels[yy, xx]),
                         max(labels[y, x], labels[yy, xx]))
                    )
    return pairs


def histogram_recompute(img_colors, member_mask, centers):
    """Bin counts of the masked pixels by explicit nearest-center scan."""
    k = centers.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    for color in img_colors[member_mask]:
        d = ((centers - color[None, :]) ** 2).sum(axis=1)
        counts[int(np.argmin(d))] += 1
    return counts


class ShadowMerge:
    """Heap-free re-implementation of the greedy merge loop.

    Keeps the full multiset of queue entries Algorithm 1's insertion
    discipline produces (initial edges plus every winner-neighbor
    re-insertion, stale entries never purged) and selects each merge by
    scanning for the minimal entry whose endpoints are both alive, using
    the same (key, lo, hi, i, j) tie-break as the implementation.
    """

    def __init__(self, areas, counts, adjacency, cost_matrix, w2):
        self.areas = dict(areas)
        self.counts = {i: c.copy() for i, c in counts.items()}
        self.adj = {i: set(s) for i, s in adjacency.items()}
        self.cost_matrix = cost_matrix
        self.w2 = w2
        self.het = {i: 0.0 for i in self.areas}
        self.entries = []  # multiset of (key, lo, hi, i, j)
        self.consumed = []
        for i in sorted(self.areas):
            for j in sorted(self.adj[i]):
                if j > i:
                    e = self._dist(i, j)
                    self._insert(e - 0.0 - 0.0, i, j, i, j)

    def _insert(self, key, lo, hi, i, j):
        self.entries.append((key, lo, hi, i, j))
        self.consumed.append(False)

    def _dist(self, i, j):
        wu = self.counts[i] / self.areas[i]
        wv = self.counts[j] / self.areas[j]
        return self.w2(wu, wv, self.cost_matrix)

    def step(self):
        """Execute one merge exactly as the lazy-deletion heap would."""
        while True:
            best = None
            best_idx = -1
            for idx, entry in enumerate(self.entries):
                if not self.consumed[idx] and (best is None or entry < best):
                    best = entry
                    best_idx = idx
            if best is None:
                return None
            self.consumed[best_idx] = True
            _, lo, hi, i, j = best
            if i in self.areas and j in self.areas:
                break
        e = self._dist(i, j)
        kappa = e - self.het[i] - self.het[j]
        self.counts[i] = self.counts[i] + self.counts[j]
        self.areas[i] += self.areas[j]
        del self.areas[j], self.counts[j]
        for nb in self.adj[j]:
            self.adj[nb].discard(j)
            if nb != i:
                self.adj[nb].add(i)
        self.adj[i] |= self.adj[j]
        self.adj[i] -= {i, j}
        del self.adj[j]
        self.het[i] = e
        for nb in sorted(self.adj[i]):
            e2 = self._dist(i, nb)
            lo2, hi2 = (i, nb) if i < nb else (nb, i)
            self._insert(e2 - self.het[i] - self.het[nb], lo2, hi2, i, nb)
        return {"winner": i, "loser": j, "cost": e, "kappa": kappa}
