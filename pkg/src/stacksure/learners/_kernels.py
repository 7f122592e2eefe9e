"""Compiled inner loops for the tree, lasso and SVM learners.

Everything here is deterministic: tree randomness comes from an explicit
splitmix64 state threaded through the code, so identical seeds rebuild
identical forests on any platform. Functions are only called through
their jitted entry points.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _sm64(state):
    """splitmix64: returns (next_state, pseudo-random uint64)."""
    state = state + _U64_GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _U64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U64_MIX2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def build_forest(X, y, n_trees, min_leaf, n_cand, seed):
    """Grow a bagged ensemble of Gini CART trees on (X, y).

    Each tree sees a bootstrap sample of rows and draws n_cand candidate
    features per node. Nodes split while impure; splits leaving a child
    smaller than min_leaf are not considered. Returns flat node arrays
    plus the per-tree node counts.
    """
    n, m = X.shape
    max_nodes = 2 * n + 3
    feat = np.full((n_trees, max_nodes), -1, np.int64)
    thr = np.zeros((n_trees, max_nodes))
    left = np.zeros((n_trees, max_nodes), np.int64)
    right = np.zeros((n_trees, max_nodes), np.int64)
    vote = np.zeros((n_trees, max_nodes), np.int8)
    n_nodes = np.zeros(n_trees, np.int64)

    rows = np.empty(n, np.int64)
    scratch = np.empty(n, np.int64)
    best_order = np.empty(n, np.int64)
    vals = np.empty(n)
    ysrt = np.empty(n, np.int64)
    perm = np.empty(m, np.int64)
    stack = np.empty((max_nodes, 3), np.int64)

    state = seed
    kq = n_cand if n_cand < m else m

    for t in range(n_trees):
        for i in range(n):
            state, z = _sm64(state)
            rows[i] = np.int64(z % np.uint64(n))
        node_count = 1
        stack[0, 0] = 0
        stack[0, 1] = 0
        stack[0, 2] = n
        depth = 1
        while depth > 0:
            depth -= 1
            node = stack[depth, 0]
            start = stack[depth, 1]
            end = stack[depth, 2]
            n_node = end - start
            c1 = 0
            for i in range(start, end):
                c1 += y[rows[i]]
            if c1 == 0 or c1 == n_node or n_node < 2 * min_leaf:
                vote[t, node] = 1 if 2 * c1 > n_node else 0
                continue

            for i in range(m):
                perm[i] = i
            for s in range(kq):
                state, z = _sm64(state)
                j = s + np.int64(z % np.uint64(m - s))
                perm[s], perm[j] = perm[j], perm[s]

            best_cost = np.inf
            best_feat = -1
            best_thr = 0.0
            best_pos = -1
            for c in range(kq):
                f = perm[c]
                for i in range(n_node):
                    vals[i] = X[rows[start + i], f]
                order = np.argsort(vals[:n_node])
                for i in range(n_node):
                    ysrt[i] = y[rows[start + order[i]]]
                c1l = 0
                for i in range(n_node - 1):
                    c1l += ysrt[i]
                    nl = i + 1
                    nr = n_node - nl
                    if nl < min_leaf:
                        continue
                    if nr < min_leaf:
                        break
                    lo = vals[order[i]]
                    hi = vals[order[i + 1]]
                    if lo == hi:
                        continue
                    c0l = nl - c1l
                    c1r = c1 - c1l
                    c0r = nr - c1r
                    cost = (nl - (c1l * c1l + c0l * c0l) / nl) + (
                        nr - (c1r * c1r + c0r * c0r) / nr
                    )
                    if cost < best_cost:
                        best_cost = cost
                        best_feat = f
                        best_thr = 0.5 * (lo + hi)
                        best_pos = i
                        for q in range(n_node):
                            best_order[q] = order[q]

            if best_feat < 0:
                vote[t, node] = 1 if 2 * c1 > n_node else 0
                continue

            for i in range(n_node):
                scratch[i] = rows[start + best_order[i]]
            for i in range(n_node):
                rows[start + i] = scratch[i]

            feat[t, node] = best_feat
            thr[t, node] = best_thr
            lid = node_count
            rid = node_count + 1
            node_count += 2
            left[t, node] = lid
            right[t, node] = rid
            stack[depth, 0] = lid
            stack[depth, 1] = start
            stack[depth, 2] = start + best_pos + 1
            depth += 1
            stack[depth, 0] = rid
            stack[depth, 1] = start + best_pos + 1
            stack[depth, 2] = end
            depth += 1
        n_nodes[t] = node_count
    return feat, thr, left, right, vote, n_nodes


@njit(cache=True)
def forest_scores(feat, thr, left, right, vote, X):
    """Fraction of trees voting class 1 for each row of X."""
    n = X.shape[0]
    n_trees = feat.shape[0]
    out = np.empty(n)
    for i in range(n):
        s = 0.0
        for t in range(n_trees):
            node = 0
            while feat[t, node] >= 0:
                if X[i, feat[t, node]] <= thr[t, node]:
                    node = left[t, node]
                else:
                    node = right[t, node]
            s += vote[t, node]
        out[i] = s / n_trees
    return out


@njit(cache=True)
def lasso_cd(G, q, lam_half, tol, max_sweeps):
    """Cyclic coordinate descent on the Gram form of the lasso problem.

    Minimizes ||y - X b||^2 + lam |b|_1 given G = X'X and q = X'y, with
    soft threshold lam_half = lam / 2. Stops when the largest coefficient
    change in a full sweep drops below tol.
    """
    m = q.shape[0]
    beta = np.zeros(m)
    gb = np.zeros(m)
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        max_delta = 0.0
        for j in range(m):
            d = G[j, j]
            if d <= 0.0:
                continue
            rho = q[j] - gb[j] + d * beta[j]
            if rho > lam_half:
                new = (rho - lam_half) / d
            elif rho < -lam_half:
                new = (rho + lam_half) / d
            else:
                new = 0.0
            delta = new - beta[j]
            if delta != 0.0:
                beta[j] = new
                for i in range(m):
                    gb[i] += G[j, i] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if max_delta < tol:
            return beta, sweeps, True
    return beta, sweeps, False


@njit(cache=True)
def svm_subgradient(X, y_signed, epochs, lam, seed):
    """Hinge-loss linear SVM by per-sample subgradient steps.

    Decreasing step 1/(lam * t) over a seeded per-epoch permutation; the
    intercept is updated on margin violations but not regularized.
    """
    n, m = X.shape
    w = np.zeros(m)
    b = 0.0
    perm = np.empty(n, np.int64)
    state = seed
    t = 0
    for _ in range(epochs):
        for i in range(n):
            perm[i] = i
        for i in range(n - 1, 0, -1):
            state, z = _sm64(state)
            j = np.int64(z % np.uint64(i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        for i in range(n):
            t += 1
            eta = 1.0 / (lam * t)
            idx = perm[i]
            margin = 0.0
            for f in range(m):
                margin += X[idx, f] * w[f]
            margin = y_signed[idx] * (margin + b)
            shrink = 1.0 - eta * lam
            for f in range(m):
                w[f] *= shrink
            if margin < 1.0:
                for f in range(m):
                    w[f] += eta * y_signed[idx] * X[idx, f]
                b += eta * y_signed[idx]
    return w, b


def warm_up():
    """Trigger JIT compilation of all kernels on tiny inputs."""
    X = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [1.5, -0.5]])
    y = np.array([0, 1, 0, 1], dtype=np.int64)
    feat, thr, left, right, vote, _ = build_forest(X, y, 2, 2, 1, np.uint64(7))
    forest_scores(feat, thr, left, right, vote, X)
    G = X.T @ X
    lasso_cd(G, X.T @ y.astype(np.float64), 0.05, 1e-9, 50)
    svm_subgradient(X, np.array([-1.0, 1.0, -1.0, 1.0]), 2, 0.25, np.uint64(3))
