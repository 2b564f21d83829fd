"""Compiled kernels for CART tree growth and routing.

Every column is sorted once per tree. Each node owns the same contiguous
segment in all column orders, and splitting a node stable-partitions those
segments, so they stay sorted and split search is a single sweep per
candidate column. The sweep updates the sum of squared class counts on each
side in O(1) per sample; maximising
``sumsq_left / n_left + sumsq_right / n_right`` is equivalent to maximising the
Gini impurity decrease.
"""

import numpy as np
from numba import njit

LEAF = -1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, nogil=True)
def _splitmix64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _randbelow(state, m):
    return np.int64(_splitmix64(state) % np.uint64(m))


@njit(cache=True, nogil=True)
def _grow_i(a, cap):
    out = np.full(cap, LEAF, dtype=np.int64)
    out[:a.shape[0]] = a
    return out


@njit(cache=True, nogil=True)
def _grow_f(a, cap):
    out = np.zeros(cap, dtype=np.float64)
    out[:a.shape[0]] = a
    return out


@njit(cache=True, nogil=True)
def _grow_counts(a, cap):
    out = np.zeros((cap, a.shape[1]), dtype=np.int64)
    out[:a.shape[0]] = a
    return out


@njit(cache=True, nogil=True)
def _better(score, col, thr, best_score, best_col, best_thr):
    # Ties go to the lowest column, then the lowest threshold.
    if best_col < 0 or score > best_score:
        return True
    if score < best_score:
        return False
    if col != best_col:
        return col < best_col
    return thr < best_thr


@njit(cache=True, nogil=True)
def build_tree(Xs, ys, order, n_classes, max_depth, min_samples_leaf, n_candidates, seed):
    """Grow one tree on the (already resampled) rows ``Xs``/``ys``.

    ``order[f]`` lists row positions sorted by column ``f``; it is consumed
    (partitioned in place). ``max_depth < 0`` means unlimited. ``n_candidates``
    columns are drawn per node without replacement (all columns when
    ``n_candidates >= d``); constant columns do not use up a draw.
    Returns trimmed ``(feature, threshold, left, right, counts, depth)``.
    """
    n, n_features = Xs.shape
    state = np.zeros(1, dtype=np.uint64)
    state[0] = np.uint64(seed)

    cap = 64
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    counts = np.zeros((cap, n_classes), dtype=np.int64)
    node_depth = np.zeros(cap, dtype=np.int64)

    # Stack of (node, start, end); LIFO growth keeps at most depth + 2 pending.
    stack_cap = n + 2 if max_depth < 0 else min(n + 2, max_depth + 3)
    stack = np.empty((stack_cap + 8, 3), dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 0
    stack[top, 2] = n
    top += 1
    n_nodes = 1

    perm = np.arange(n_features)
    lcnt = np.zeros(n_classes, dtype=np.int64)
    rcnt = np.zeros(n_classes, dtype=np.int64)
    goes_left = np.zeros(n, dtype=np.bool_)
    buf = np.empty(n, dtype=order.dtype)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        m = end - start
        depth = node_depth[node]

        n_present = 0
        for i in range(start, end):
            counts[node, ys[order[0, i]]] += 1
        for c in range(n_classes):
            if counts[node, c] > 0:
                n_present += 1

        if n_present <= 1 or m < 2 * min_samples_leaf or (max_depth >= 0 and depth >= max_depth):
            continue

        parent_sq = 0
        for c in range(n_classes):
            parent_sq += counts[node, c] * counts[node, c]

        best_col = -1
        best_thr = 0.0
        best_score = 0.0
        visited = 0
        for j in range(n_features):
            perm[j] = j
        for draw in range(n_features):
            if visited >= n_candidates:
                break
            if n_candidates < n_features:
                pick = draw + _randbelow(state, n_features - draw)
                tmp = perm[draw]
                perm[draw] = perm[pick]
                perm[pick] = tmp
            f = perm[draw]
            seg = order[f]
            if Xs[seg[start], f] == Xs[seg[end - 1], f]:
                continue
            visited += 1

            for c in range(n_classes):
                lcnt[c] = 0
                rcnt[c] = counts[node, c]
            sq_l = 0
            sq_r = parent_sq
            for i in range(start, end - 1):
                c = ys[seg[i]]
                sq_l += 2 * lcnt[c] + 1
                lcnt[c] += 1
                sq_r -= 2 * rcnt[c] - 1
                rcnt[c] -= 1
                n_l = i + 1 - start
                n_r = m - n_l
                if n_l < min_samples_leaf or n_r < min_samples_leaf:
                    continue
                a = Xs[seg[i], f]
                b = Xs[seg[i + 1], f]
                if a == b:
                    continue
                score = sq_l / n_l + sq_r / n_r
                thr = a / 2.0 + b / 2.0
                if thr >= b or thr < a:
                    thr = a
                if _better(score, f, thr, best_score, best_col, best_thr):
                    best_score = score
                    best_col = f
                    best_thr = thr

        if best_col < 0:
            continue

        # Stable partition of every column order: rows <= threshold first.
        nl = 0
        for i in range(start, end):
            pos = order[0, i]
            flag = Xs[pos, best_col] <= best_thr
            goes_left[pos] = flag
            if flag:
                nl += 1
        for g in range(n_features):
            seg = order[g]
            wl = start
            nr = 0
            for i in range(start, end):
                pos = seg[i]
                if goes_left[pos]:
                    seg[wl] = pos
                    wl += 1
                else:
                    buf[nr] = pos
                    nr += 1
            for i in range(nr):
                seg[wl + i] = buf[i]

        if n_nodes + 2 > cap:
            cap *= 2
            feature = _grow_i(feature, cap)
            threshold = _grow_f(threshold, cap)
            left = _grow_i(left, cap)
            right = _grow_i(right, cap)
            counts = _grow_counts(counts, cap)
            node_depth = _grow_i(node_depth, cap)
        li = n_nodes
        ri = n_nodes + 1
        n_nodes += 2
        feature[node] = best_col
        threshold[node] = best_thr
        left[node] = li
        right[node] = ri
        node_depth[li] = depth + 1
        node_depth[ri] = depth + 1
        # Right first so the left subtree is grown next.
        stack[top, 0] = ri
        stack[top, 1] = start + nl
        stack[top, 2] = end
        top += 1
        stack[top, 0] = li
        stack[top, 1] = start
        stack[top, 2] = start + nl
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), counts[:n_nodes].copy(), node_depth[:n_nodes].copy())


@njit(cache=True, nogil=True)
def apply_tree(X, feature, threshold, left, right):
    """Leaf index reached by each row of ``X``."""
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out
