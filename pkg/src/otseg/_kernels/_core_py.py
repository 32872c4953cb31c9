"""Pure NumPy/Python fallback for the compiled kernels.

Mirrors ``otseg._kernels._core`` (Cython).  Arithmetic is written with the
same operation order as the compiled code so both backends return
bit-identical results; the parity suite asserts exact equality.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

BACKEND_NAME = "python"

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def slic_assign(feat, centers, window, color_weight):
    """One SLIC assignment sweep.

    feat: (H, W, C) float64; centers: (m, 2+C) rows [cy, cx, color...].
    Each pixel inside a center's +-window box competes with
    dist^2 = (dy^2 + dx^2) + color_weight * ||color - center||^2.
    Returns (labels int32, best float64); labels are -1 where no window
    covered the pixel.
    """
    H, W, C = feat.shape
    best = np.full((H, W), np.inf)
    labels = np.full((H, W), -1, dtype=np.int32)
    ys = np.arange(H, dtype=np.float64)
    xs = np.arange(W, dtype=np.float64)
    for j in range(centers.shape[0]):
        cy = centers[j, 0]
        cx = centers[j, 1]
        y0 = max(0, int(np.floor(cy)) - window)
        y1 = min(H, int(np.floor(cy)) + window + 1)
        x0 = max(0, int(np.floor(cx)) - window)
        x1 = min(W, int(np.floor(cx)) + window + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        dy = ys[y0:y1] - cy
        dx = xs[x0:x1] - cx
        diff = feat[y0:y1, x0:x1, :] - centers[j, 2:]
        col = (diff * diff).sum(axis=2)
        d2 = ((dy * dy)[:, None] + (dx * dx)[None, :]) + color_weight * col
        sub = best[y0:y1, x0:x1]
        upd = d2 < sub
        sub[upd] = d2[upd]
        labels[y0:y1, x0:x1][upd] = j
    return labels, best


def power_assign(shape, gens, window):
    """Anisotropic power-diagram assignment, windowed.

    gens: (m, 6) rows [cy, cx, a00, a01, a11, mu]; score is
    a00*dy^2 + a11*dx^2 + 2*a01*dy*dx - mu.  Ties keep the lowest
    generator index; uncovered pixels stay -1.
    """
    H, W = shape
    best = np.full((H, W), np.inf)
    labels = np.full((H, W), -1, dtype=np.int32)
    ys = np.arange(H, dtype=np.float64)
    xs = np.arange(W, dtype=np.float64)
    for j in range(gens.shape[0]):
        cy, cx, a00, a01, a11, mu = gens[j]
        w01 = 2.0 * a01
        y0 = max(0, int(np.floor(cy)) - window)
        y1 = min(H, int(np.floor(cy)) + window + 1)
        x0 = max(0, int(np.floor(cx)) - window)
        x1 = min(W, int(np.floor(cx)) + window + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        dy = ys[y0:y1] - cy
        dx = xs[x0:x1] - cx
        d = (
            (a00 * (dy * dy))[:, None]
            + (a11 * (dx * dx))[None, :]
            + w01 * (dy[:, None] * dx[None, :])
        ) - mu
        sub = best[y0:y1, x0:x1]
        upd = d < sub
        sub[upd] = d[upd]
        labels[y0:y1, x0:x1][upd] = j
    return labels, best


def assign_bins(colors, centers):
    """Nearest-center index per color row; ties keep the lowest index."""
    N, C = colors.shape
    k = centers.shape[0]
    out = np.empty(N, dtype=np.int32)
    step = max(1, 4_000_000 // max(1, k * C))
    for s in range(0, N, step):
        chunk = colors[s : s + step]
        diff = chunk[:, None, :] - centers[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        out[s : s + step] = np.argmin(d2, axis=1).astype(np.int32)
    return out


def label_components(labels):
    """4-connected components of a multi-valued label image.

    Components are numbered by first row-major occurrence, so the output is
    identical across backends.  Returns (components int32, count).
    """
    comps = np.empty(labels.shape, dtype=np.int64)
    offset = 0
    for val in np.unique(labels):
        mask = labels == val
        cc, n = ndimage.label(mask, structure=_CROSS)
        comps[mask] = cc[mask] + (offset - 1)
        offset += int(n)
    flat = comps.reshape(-1)
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    out = rank[inverse].reshape(labels.shape).astype(np.int32)
    return out, offset


def solve_transport(cost, supply, demand, max_iter=0):
    """Transportation simplex on a dense cost matrix.

    Callers must pass strictly positive, balanced supply/demand.  Uses a
    northwest-corner start and Dantzig pivoting (most negative reduced cost,
    first of ties in row-major order); after a long streak of degenerate
    pivots the entering rule falls back to Bland's (first negative, which
    cannot cycle).  The leaving cell is the first minimum-ratio cell along
    the cycle.

    Returns (status, objective, basis_rows, basis_cols, flows, u, v) where
    status 0 means optimal and 1 means the iteration cap was hit.  u and v
    are the final dual values (u[0] anchored at 0).
    """
    a, b = cost.shape
    c = [[float(cost[i, j]) for j in range(b)] for i in range(a)]
    rv = [float(x) for x in supply]
    rw = [float(x) for x in demand]
    nb = a + b - 1
    if max_iter <= 0:
        max_iter = 200 * (a + b) + 1000

    cscale = 1.0
    for i in range(a):
        for j in range(b):
            x = c[i][j]
            if x > cscale:
                cscale = x
    tol = 1e-10 * cscale

    # northwest-corner initial basic solution (exactly a+b-1 cells)
    br = [0] * nb
    bc = [0] * nb
    bf = [0.0] * nb
    i = j = 0
    for t in range(nb):
        br[t] = i
        bc[t] = j
        q = rv[i] if rv[i] <= rw[j] else rw[j]
        bf[t] = q
        rv[i] -= q
        rw[j] -= q
        if i == a - 1 and j == b - 1:
            break
        if rv[i] == 0.0 and i < a - 1:
            i += 1
        elif j < b - 1:
            j += 1
        else:
            i += 1

    n_nodes = a + b
    u = [0.0] * a
    v = [0.0] * b
    status = 1
    use_bland = False
    degenerate_streak = 0
    stall_limit = 3 * (a + b) + 10
    for _ in range(max_iter):
        # duals from the basis tree (u[0] = 0)
        adj = [[] for _ in range(n_nodes)]
        for t in range(nb):
            adj[br[t]].append(t)
            adj[a + bc[t]].append(t)
        known = [False] * n_nodes
        known[0] = True
        u[0] = 0.0
        stack = [0]
        while stack:
            node = stack.pop()
            for t in adj[node]:
                ri = br[t]
                cj = a + bc[t]
                if node == ri and not known[cj]:
                    v[bc[t]] = c[ri][bc[t]] - u[ri]
                    known[cj] = True
                    stack.append(cj)
                elif node == cj and not known[ri]:
                    u[ri] = c[ri][bc[t]] - v[bc[t]]
                    known[ri] = True
                    stack.append(ri)

        # entering arc: Dantzig (most negative reduced cost) or, after a
        # degenerate stall, Bland (first negative)
        ei = -1
        ej = -1
        if use_bland:
            for i in range(a):
                ui = u[i]
                row = c[i]
                for j in range(b):
                    if row[j] - ui - v[j] < -tol:
                        ei = i
                        ej = j
                        break
                if ei >= 0:
                    break
        else:
            best_rc = -tol
            for i in range(a):
                ui = u[i]
                row = c[i]
                for j in range(b):
                    rc = row[j] - ui - v[j]
                    if rc < best_rc:
                        best_rc = rc
                        ei = i
                        ej = j
        if ei < 0:
            status = 0
            break

        # unique tree path from row node ei to col node a+ej
        parent_cell = [-1] * n_nodes
        parent_node = [-1] * n_nodes
        seen = [False] * n_nodes
        seen[ei] = True
        stack = [ei]
        target = a + ej
        while stack:
            node = stack.pop()
            if node == target:
                break
            for t in adj[node]:
                ri = br[t]
                cj = a + bc[t]
                other = cj if node == ri else ri
                if not seen[other]:
                    seen[other] = True
                    parent_cell[other] = t
                    parent_node[other] = node
                    stack.append(other)
        path = []
        node = target
        while node != ei:
            path.append(parent_cell[node])
            node = parent_node[node]
        path.reverse()

        # even positions (0-based) along the path receive -theta
        theta = -1.0
        leave_pos = -1
        for p in range(0, len(path), 2):
            ft = bf[path[p]]
            if theta < 0.0 or ft < theta:
                theta = ft
                leave_pos = p
        for p in range(len(path)):
            if p % 2 == 0:
                bf[path[p]] -= theta
            else:
                bf[path[p]] += theta
        leave = path[leave_pos]
        br[leave] = ei
        bc[leave] = ej
        bf[leave] = theta
        if theta == 0.0:
            degenerate_streak += 1
            if degenerate_streak > stall_limit:
                use_bland = True
        else:
            degenerate_streak = 0

    objective = 0.0
    for t in range(nb):
        objective += bf[t] * c[br[t]][bc[t]]
    return (
        status,
        objective,
        np.array(br, dtype=np.int32),
        np.array(bc, dtype=np.int32),
        np.array(bf, dtype=np.float64),
        np.array(u, dtype=np.float64),
        np.array(v, dtype=np.float64),
    )
