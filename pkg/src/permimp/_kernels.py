"""Numba kernels for tree growth, batch prediction, and importance sums.

All kernels are single-threaded and use fixed iteration order without fastmath,
so results are bit-identical across runs, processes, and worker counts.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NO_FEATURE = -1


@njit(cache=True)
def best_split_slice(X, y, idx, start, end, cand, min_leaf):
    """Exact variance-reduction split search over one node.

    The node holds rows ``idx[start:end]`` of X/y; ``cand`` are the candidate
    feature indices in ascending order. Returns (feature, threshold, gain)
    with feature = -1 when no admissible split strictly reduces the
    within-node sum of squares. Candidate thresholds are midpoints between
    consecutive distinct sorted values; ties in gain resolve to the smallest
    feature index, then the smallest threshold (first strict improvement wins
    under ascending scan order).
    """
    mn = end - start
    best_f = NO_FEATURE
    best_z = 0.0
    best_gain = 0.0
    if mn < 2 * min_leaf:
        return best_f, best_z, best_gain

    ys = np.empty(mn)
    ymin = y[idx[start]]
    ymax = ymin
    tot = 0.0
    tot2 = 0.0
    for ii in range(mn):
        v = y[idx[start + ii]]
        ys[ii] = v
        tot += v
        tot2 += v * v
        if v < ymin:
            ymin = v
        if v > ymax:
            ymax = v
    if ymin == ymax:  # pure node, exact check
        return best_f, best_z, best_gain
    sse_parent = tot2 - tot * tot / mn

    xs = np.empty(mn)
    for ci in range(cand.shape[0]):
        f = cand[ci]
        for ii in range(mn):
            xs[ii] = X[idx[start + ii], f]
        order = np.argsort(xs)
        s1 = 0.0
        s2 = 0.0
        for k in range(mn - 1):
            yv = ys[order[k]]
            s1 += yv
            s2 += yv * yv
            xl = xs[order[k]]
            xr = xs[order[k + 1]]
            if xl == xr:
                continue
            nl = k + 1
            nr = mn - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            sse_l = s2 - s1 * s1 / nl
            r1 = tot - s1
            sse_r = (tot2 - s2) - r1 * r1 / nr
            gain = (sse_parent - sse_l - sse_r) / mn
            if gain > best_gain:
                best_gain = gain
                best_f = f
                best_z = 0.5 * (xl + xr)
    if best_gain <= 0.0:
        return NO_FEATURE, 0.0, 0.0
    return best_f, best_z, best_gain


@njit(cache=True)
def grow_kernel(X, y, subspaces, min_leaf, max_leaves):
    """Grow one regression tree on the in-bag rows X/y.

    ``subspaces[k]`` is the pre-drawn ascending candidate-feature row consumed
    by the k-th created node; its row count bounds the node budget. Growth is
    best-first: the frontier node with the largest gain (ties: oldest node) is
    expanded until the leaf budget is exhausted (max_leaves = 0 means
    unlimited). Returns flat node arrays truncated to the created count.
    """
    m = X.shape[0]
    capacity = subspaces.shape[0]

    feature = np.full(capacity, NO_FEATURE, dtype=np.int64)
    threshold = np.zeros(capacity)
    left = np.full(capacity, -1, dtype=np.int64)
    right = np.full(capacity, -1, dtype=np.int64)
    value = np.zeros(capacity)
    count = np.zeros(capacity, dtype=np.int64)

    starts = np.zeros(capacity, dtype=np.int64)
    ends = np.zeros(capacity, dtype=np.int64)
    cand_f = np.full(capacity, NO_FEATURE, dtype=np.int64)
    cand_z = np.zeros(capacity)
    cand_gain = np.zeros(capacity)

    idx = np.arange(m)
    tmp = np.empty(m, dtype=np.int64)

    frontier = np.empty(capacity, dtype=np.int64)
    n_frontier = 0

    # root
    starts[0] = 0
    ends[0] = m
    tot = 0.0
    for i in range(m):
        tot += y[i]
    value[0] = tot / m
    count[0] = m
    n_nodes = 1
    f0, z0, g0 = best_split_slice(X, y, idx, 0, m, subspaces[0], min_leaf)
    if f0 != NO_FEATURE:
        cand_f[0] = f0
        cand_z[0] = z0
        cand_gain[0] = g0
        frontier[0] = 0
        n_frontier = 1

    leaves = 1
    while n_frontier > 0 and (max_leaves == 0 or leaves < max_leaves):
        # pick the frontier node with the largest gain; ties -> oldest node id
        best_pos = 0
        best_id = frontier[0]
        best_gain = cand_gain[best_id]
        for fp in range(1, n_frontier):
            nid = frontier[fp]
            g = cand_gain[nid]
            if g > best_gain or (g == best_gain and nid < best_id):
                best_pos = fp
                best_id = nid
                best_gain = g
        nd = best_id
        n_frontier -= 1
        frontier[best_pos] = frontier[n_frontier]

        s = starts[nd]
        e = ends[nd]
        f = cand_f[nd]
        z = cand_z[nd]
        lpos = 0
        rpos = e - s - 1
        for ii in range(s, e):
            r = idx[ii]
            if X[r, f] < z:
                tmp[lpos] = r
                lpos += 1
            else:
                tmp[rpos] = r
                rpos -= 1
        nl = lpos
        for ii in range(e - s):
            idx[s + ii] = tmp[ii]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[nd] = f
        threshold[nd] = z
        left[nd] = lid
        right[nd] = rid

        starts[lid] = s
        ends[lid] = s + nl
        starts[rid] = s + nl
        ends[rid] = e
        for child in (lid, rid):
            cs = starts[child]
            ce = ends[child]
            ctot = 0.0
            for ii in range(cs, ce):
                ctot += y[idx[ii]]
            value[child] = ctot / (ce - cs)
            count[child] = ce - cs
            cf, cz, cg = best_split_slice(X, y, idx, cs, ce, subspaces[child], min_leaf)
            if cf != NO_FEATURE:
                cand_f[child] = cf
                cand_z[child] = cz
                cand_gain[child] = cg
                frontier[n_frontier] = child
                n_frontier += 1
        leaves += 1

    return (feature[:n_nodes], threshold[:n_nodes], left[:n_nodes],
            right[:n_nodes], value[:n_nodes], count[:n_nodes])


@njit(cache=True)
def predict_rows(feature, threshold, left, right, value, X):
    """Route each row of X to its leaf; x goes left iff x[f] < z."""
    m = X.shape[0]
    out = np.empty(m)
    for i in range(m):
        node = 0
        while feature[node] != NO_FEATURE:
            if X[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@njit(cache=True)
def importance_deltas(feature, threshold, left, right, value, X_oob, y_oob, perms):
    """Per-feature OOB squared-error increase for one tree.

    ``perms[j]`` permutes the OOB row positions used for feature j. The
    permuted point differs from the original only in coordinate j, which the
    descent reads through the permutation instead of materializing permuted
    copies. Returns, for each feature j,
    sum_i [(y_i - tree(x_i^perm_j))^2 - (y_i - tree(x_i))^2].
    """
    g = X_oob.shape[0]
    p = X_oob.shape[1]
    base_sum = 0.0
    for i in range(g):
        node = 0
        while feature[node] != NO_FEATURE:
            if X_oob[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        d = y_oob[i] - value[node]
        base_sum += d * d
    out = np.empty(p)
    for j in range(p):
        s = 0.0
        for i in range(g):
            node = 0
            while feature[node] != NO_FEATURE:
                f = feature[node]
                if f == j:
                    xv = X_oob[perms[j, i], j]
                else:
                    xv = X_oob[i, f]
                if xv < threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            d = y_oob[i] - value[node]
            s += d * d
        out[j] = s - base_sum
    return out
