# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Semantics and arithmetic order mirror ``_core_py`` exactly; the parity test
suite asserts bit-identical outputs between the two backends.
"""

import numpy as np

from libc.math cimport INFINITY, floor
from libc.stdlib cimport free, malloc

BACKEND_NAME = "compiled"


def slic_assign(double[:, :, ::1] feat, double[:, ::1] centers, int window,
                double color_weight):
    """One SLIC assignment sweep; see _core_py.slic_assign."""
    cdef Py_ssize_t H = feat.shape[0]
    cdef Py_ssize_t W = feat.shape[1]
    cdef Py_ssize_t C = feat.shape[2]
    cdef Py_ssize_t m = centers.shape[0]
    best_arr = np.full((H, W), np.inf)
    labels_arr = np.full((H, W), -1, dtype=np.int32)
    cdef double[:, ::1] best = best_arr
    cdef int[:, ::1] labels = labels_arr
    cdef Py_ssize_t j, y, x, c, y0, y1, x0, x1, anchor_y, anchor_x
    cdef double cy, cx, dy, dx, s, d2, diff
    with nogil:
        for j in range(m):
            cy = centers[j, 0]
            cx = centers[j, 1]
            anchor_y = <Py_ssize_t>floor(cy)
            anchor_x = <Py_ssize_t>floor(cx)
            y0 = anchor_y - window
            if y0 < 0:
                y0 = 0
            y1 = anchor_y + window + 1
            if y1 > H:
                y1 = H
            x0 = anchor_x - window
            if x0 < 0:
                x0 = 0
            x1 = anchor_x + window + 1
            if x1 > W:
                x1 = W
            if y0 >= y1 or x0 >= x1:
                continue
            for y in range(y0, y1):
                dy = y - cy
                for x in range(x0, x1):
                    dx = x - cx
                    s = 0.0
                    for c in range(C):
                        diff = feat[y, x, c] - centers[j, 2 + c]
                        s = s + diff * diff
                    d2 = ((dy * dy) + (dx * dx)) + color_weight * s
                    if d2 < best[y, x]:
                        best[y, x] = d2
                        labels[y, x] = <int>j
    return labels_arr, best_arr


def power_assign(shape, double[:, ::1] gens, int window):
    """Windowed anisotropic power-diagram labeling; see _core_py."""
    cdef Py_ssize_t H = shape[0]
    cdef Py_ssize_t W = shape[1]
    cdef Py_ssize_t m = gens.shape[0]
    best_arr = np.full((H, W), np.inf)
    labels_arr = np.full((H, W), -1, dtype=np.int32)
    cdef double[:, ::1] best = best_arr
    cdef int[:, ::1] labels = labels_arr
    cdef Py_ssize_t j, y, x, y0, y1, x0, x1, anchor_y, anchor_x
    cdef double cy, cx, a00, a01, a11, mu, w01, dy, dx, d
    with nogil:
        for j in range(m):
            cy = gens[j, 0]
            cx = gens[j, 1]
            a00 = gens[j, 2]
            a01 = gens[j, 3]
            a11 = gens[j, 4]
            mu = gens[j, 5]
            w01 = 2.0 * a01
            anchor_y = <Py_ssize_t>floor(cy)
            anchor_x = <Py_ssize_t>floor(cx)
            y0 = anchor_y - window
            if y0 < 0:
                y0 = 0
            y1 = anchor_y + window + 1
            if y1 > H:
                y1 = H
            x0 = anchor_x - window
            if x0 < 0:
                x0 = 0
            x1 = anchor_x + window + 1
            if x1 > W:
                x1 = W
            if y0 >= y1 or x0 >= x1:
                continue
            for y in range(y0, y1):
                dy = y - cy
                for x in range(x0, x1):
                    dx = x - cx
                    d = ((a00 * (dy * dy)) + (a11 * (dx * dx))
                         + w01 * (dy * dx)) - mu
                    if d < best[y, x]:
                        best[y, x] = d
                        labels[y, x] = <int>j
    return labels_arr, best_arr


def assign_bins(double[:, ::1] colors, double[:, ::1] centers):
    """Nearest-center index per color row; ties keep the lowest index."""
    cdef Py_ssize_t N = colors.shape[0]
    cdef Py_ssize_t C = colors.shape[1]
    cdef Py_ssize_t k = centers.shape[0]
    out_arr = np.empty(N, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef Py_ssize_t n, kk, c
    cdef double s, bestv, diff
    cdef int arg
    with nogil:
        for n in range(N):
            bestv = INFINITY
            arg = 0
            for kk in range(k):
                s = 0.0
                for c in range(C):
                    diff = colors[n, c] - centers[kk, c]
                    s = s + diff * diff
                if s < bestv:
                    bestv = s
                    arg = <int>kk
            out[n] = arg
    return out_arr


cdef inline Py_ssize_t _find(Py_ssize_t* parent, Py_ssize_t x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def label_components(int[:, ::1] labels):
    """4-connected components of a multi-valued label image.

    Numbered by first row-major occurrence; identical to the fallback."""
    cdef Py_ssize_t H = labels.shape[0]
    cdef Py_ssize_t W = labels.shape[1]
    cdef Py_ssize_t n = H * W
    out_arr = np.empty((H, W), dtype=np.int32)
    cdef int[:, ::1] out = out_arr
    cdef Py_ssize_t* parent = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* comp_id = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    if parent == NULL or comp_id == NULL:
        free(parent)
        free(comp_id)
        raise MemoryError()
    cdef Py_ssize_t y, x, idx, ra, rb, count
    try:
        with nogil:
            for idx in range(n):
                parent[idx] = idx
                comp_id[idx] = -1
            for y in range(H):
                for x in range(W):
                    idx = y * W + x
                    if x > 0 and labels[y, x] == labels[y, x - 1]:
                        ra = _find(parent, idx)
                        rb = _find(parent, idx - 1)
                        if ra != rb:
                            if ra < rb:
                                parent[rb] = ra
                            else:
                                parent[ra] = rb
                    if y > 0 and labels[y, x] == labels[y - 1, x]:
                        ra = _find(parent, idx)
                        rb = _find(parent, idx - W)
                        if ra != rb:
                            if ra < rb:
                                parent[rb] = ra
                            else:
                                parent[ra] = rb
            count = 0
            for y in range(H):
                for x in range(W):
                    idx = y * W + x
                    ra = _find(parent, idx)
                    if comp_id[ra] < 0:
                        comp_id[ra] = count
                        count += 1
                    out[y, x] = <int>comp_id[ra]
    finally:
        free(parent)
        free(comp_id)
    return out_arr, int(count)


def solve_transport(double[:, ::1] cost, double[::1] supply, double[::1] demand,
                    int max_iter=0):
    """Transportation simplex; see _core_py.solve_transport for the contract."""
    cdef Py_ssize_t a = cost.shape[0]
    cdef Py_ssize_t b = cost.shape[1]
    cdef Py_ssize_t nb = a + b - 1
    cdef Py_ssize_t n_nodes = a + b
    cdef long long iter_cap
    if max_iter <= 0:
        iter_cap = 200 * (a + b) + 1000
    else:
        iter_cap = max_iter

    br_arr = np.zeros(nb, dtype=np.int64)
    bc_arr = np.zeros(nb, dtype=np.int64)
    bf_arr = np.zeros(nb, dtype=np.float64)
    u_arr = np.zeros(a, dtype=np.float64)
    v_arr = np.zeros(b, dtype=np.float64)
    cdef long long[::1] br = br_arr
    cdef long long[::1] bc = bc_arr
    cdef double[::1] bf = bf_arr
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr

    cdef double* rv = <double*>malloc(a * sizeof(double))
    cdef double* rw = <double*>malloc(b * sizeof(double))
    # per-node adjacency over basis cells, rebuilt each iteration
    cdef Py_ssize_t* deg = <Py_ssize_t*>malloc(n_nodes * sizeof(Py_ssize_t))
    cdef Py_ssize_t* offs = <Py_ssize_t*>malloc((n_nodes + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t* cells = <Py_ssize_t*>malloc(2 * nb * sizeof(Py_ssize_t))
    cdef Py_ssize_t* fill = <Py_ssize_t*>malloc(n_nodes * sizeof(Py_ssize_t))
    cdef unsigned char* known = <unsigned char*>malloc(n_nodes)
    cdef Py_ssize_t* stack = <Py_ssize_t*>malloc(n_nodes * sizeof(Py_ssize_t))
    cdef Py_ssize_t* parent_cell = <Py_ssize_t*>malloc(n_nodes * sizeof(Py_ssize_t))
    cdef Py_ssize_t* parent_node = <Py_ssize_t*>malloc(n_nodes * sizeof(Py_ssize_t))
    cdef Py_ssize_t* path = <Py_ssize_t*>malloc(nb * sizeof(Py_ssize_t))
    if (rv == NULL or rw == NULL or deg == NULL or offs == NULL or cells == NULL
            or fill == NULL or known == NULL or stack == NULL
            or parent_cell == NULL or parent_node == NULL or path == NULL):
        free(rv); free(rw); free(deg); free(offs); free(cells); free(fill)
        free(known); free(stack); free(parent_cell); free(parent_node); free(path)
        raise MemoryError()

    cdef int status = 1
    cdef double objective = 0.0
    cdef double cscale, tol, q, theta, x_, ui, rc, best_rc
    cdef Py_ssize_t i, j, t, node, ri, cj, other, sp, target, ei, ej
    cdef Py_ssize_t plen, p, leave_pos, leave
    cdef long long it
    cdef bint use_bland = 0
    cdef Py_ssize_t degenerate_streak = 0
    cdef Py_ssize_t stall_limit = 3 * (a + b) + 10
    try:
        with nogil:
            for i in range(a):
                rv[i] = supply[i]
            for j in range(b):
                rw[j] = demand[j]

            cscale = 1.0
            for i in range(a):
                for j in range(b):
                    x_ = cost[i, j]
                    if x_ > cscale:
                        cscale = x_
            tol = 1e-10 * cscale

            # northwest-corner initial basic solution
            i = 0
            j = 0
            for t in range(nb):
                br[t] = i
                bc[t] = j
                if rv[i] <= rw[j]:
                    q = rv[i]
                else:
                    q = rw[j]
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

            for it in range(iter_cap):
                # adjacency: counting sort of basis cells by endpoint node
                for node in range(n_nodes):
                    deg[node] = 0
                for t in range(nb):
                    deg[br[t]] += 1
                    deg[a + bc[t]] += 1
                offs[0] = 0
                for node in range(n_nodes):
                    offs[node + 1] = offs[node] + deg[node]
                    fill[node] = offs[node]
                for t in range(nb):
                    cells[fill[br[t]]] = t
                    fill[br[t]] += 1
                    cells[fill[a + bc[t]]] = t
                    fill[a + bc[t]] += 1

                # duals from the basis tree, u[0] anchored at 0
                for node in range(n_nodes):
                    known[node] = 0
                known[0] = 1
                u[0] = 0.0
                sp = 0
                stack[sp] = 0
                sp += 1
                while sp > 0:
                    sp -= 1
                    node = stack[sp]
                    for p in range(offs[node], offs[node + 1]):
                        t = cells[p]
                        ri = br[t]
                        cj = a + bc[t]
                        if node == ri and known[cj] == 0:
                            v[bc[t]] = cost[ri, bc[t]] - u[ri]
                            known[cj] = 1
                            stack[sp] = cj
                            sp += 1
                        elif node == cj and known[ri] == 0:
                            u[ri] = cost[ri, bc[t]] - v[bc[t]]
                            known[ri] = 1
                            stack[sp] = ri
                            sp += 1

                # entering arc: Dantzig (most negative reduced cost) or,
                # after a degenerate stall, Bland (first negative)
                ei = -1
                ej = -1
                if use_bland:
                    for i in range(a):
                        ui = u[i]
                        for j in range(b):
                            rc = cost[i, j] - ui - v[j]
                            if rc < -tol:
                                ei = i
                                ej = j
                                break
                        if ei >= 0:
                            break
                else:
                    best_rc = -tol
                    for i in range(a):
                        ui = u[i]
                        for j in range(b):
                            rc = cost[i, j] - ui - v[j]
                            if rc < best_rc:
                                best_rc = rc
                                ei = i
                                ej = j
                if ei < 0:
                    status = 0
                    break

                # unique tree path from row node ei to col node a+ej
                for node in range(n_nodes):
                    known[node] = 0
                known[ei] = 1
                sp = 0
                stack[sp] = ei
                sp += 1
                target = a + ej
                while sp > 0:
                    sp -= 1
                    node = stack[sp]
                    if node == target:
                        break
                    for p in range(offs[node], offs[node + 1]):
                        t = cells[p]
                        ri = br[t]
                        cj = a + bc[t]
                        if node == ri:
                            other = cj
                        else:
                            other = ri
                        if known[other] == 0:
                            known[other] = 1
                            parent_cell[other] = t
                            parent_node[other] = node
                            stack[sp] = other
                            sp += 1
                plen = 0
                node = target
                while node != ei:
                    path[plen] = parent_cell[node]
                    plen += 1
                    node = parent_node[node]
                # reverse in place so the path runs from ei to the target
                for p in range(plen // 2):
                    t = path[p]
                    path[p] = path[plen - 1 - p]
                    path[plen - 1 - p] = t

                # even positions (0-based) along the path receive -theta
                theta = -1.0
                leave_pos = -1
                p = 0
                while p < plen:
                    if theta < 0.0 or bf[path[p]] < theta:
                        theta = bf[path[p]]
                        leave_pos = p
                    p += 2
                for p in range(plen):
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
                        use_bland = 1
                else:
                    degenerate_streak = 0

            objective = 0.0
            for t in range(nb):
                objective += bf[t] * cost[br[t], bc[t]]
    finally:
        free(rv); free(rw); free(deg); free(offs); free(cells); free(fill)
        free(known); free(stack); free(parent_cell); free(parent_node); free(path)

    return (
        int(status),
        float(objective),
        br_arr.astype(np.int32),
        bc_arr.astype(np.int32),
        bf_arr,
        u_arr,
        v_arr,
    )
