"""Pure-Python reference kernels: CART tree growth and the SMO solver.

The compiled backend re-implements these routines statement for
statement. Floating-point expressions here are written with explicit
grouping, and both backends must keep that grouping (no fused
multiply-adds, no reassociation), so the two produce bit-identical
models. All randomness comes from an embedded splitmix64 stream seeded
per call, never from a shared global generator.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"

_MASK = (1 << 64) - 1


def _mix_next(state: int) -> tuple[int, int]:
    """splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


# ------------------------------------------------------------------ trees

def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    seed: int,
    max_depth: int,
    min_leaf: int,
    max_features: int,
    bootstrap: bool = True,
):
    """Grow one binary CART classifier tree.

    Splits maximize sum-of-squared-class-counts over the two sides
    (equivalent to minimizing weighted gini impurity, but computed from
    exact integer counts so backends cannot disagree). Ties keep the
    first candidate: features are scanned in ascending index order and
    thresholds in ascending value order under a strict > comparison.

    Returns parallel node arrays ``(feature, threshold, left, right,
    value, count)``; ``feature == -1`` marks a leaf, ``value`` is the
    class-1 fraction of the node's samples and ``count`` how many
    (bootstrap) samples reached the node.
    """
    n, d = X.shape
    state = int(seed) & _MASK

    if bootstrap:
        rows0 = np.empty(n, dtype=np.int64)
        for i in range(n):
            state, r = _mix_next(state)
            rows0[i] = r % n
    else:
        rows0 = np.arange(n, dtype=np.int64)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    count: list[int] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        count.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, rows0, 0)]
    ident = np.arange(d, dtype=np.int64)

    while stack:
        node, rows, depth = stack.pop()
        m = len(rows)
        yv = y[rows]
        n1 = int(yv.sum())
        value[node] = n1 / m
        count[node] = m
        if depth >= max_depth or m < 2 * min_leaf or n1 == 0 or n1 == m:
            continue

        if max_features >= d:
            feats = ident
        else:
            # partial Fisher-Yates: draw max_features distinct indices,
            # then sort so ties resolve toward the lowest feature index
            pool = ident.copy()
            for t in range(max_features):
                state, r = _mix_next(state)
                k = t + int(r % (d - t))
                pool[t], pool[k] = pool[k], pool[t]
            feats = np.sort(pool[:max_features])

        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        for f in feats:
            vals = X[rows, f]
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            sy = yv[order].astype(np.int64)
            c1 = np.cumsum(sy)
            bnd = np.flatnonzero(sv[:-1] != sv[1:])
            if bnd.size == 0:
                continue
            nL = bnd + 1
            ok = (nL >= min_leaf) & ((m - nL) >= min_leaf)
            bnd = bnd[ok]
            if bnd.size == 0:
                continue
            nL = bnd + 1
            nR = m - nL
            c1L = c1[bnd]
            c0L = nL - c1L
            c1R = n1 - c1L
            c0R = nR - c1R
            score = (c1L * c1L + c0L * c0L) / nL + (c1R * c1R + c0R * c0R) / nR
            k = int(np.argmax(score))
            if score[k] > best_score:
                best_score = float(score[k])
                i = int(bnd[k])
                thr = 0.5 * (sv[i] + sv[i + 1])
                if thr >= sv[i + 1]:
                    # midpoint rounded onto the upper value; fall back to
                    # the lower value so `x <= thr` still cuts at i
                    thr = float(sv[i])
                best_f = int(f)
                best_thr = float(thr)
        if best_f < 0:
            continue

        go_left = X[rows, best_f] <= best_thr
        rows_l = rows[go_left]
        rows_r = rows[~go_left]
        lid = new_node()
        rid = new_node()
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack.append((rid, rows_r, depth + 1))
        stack.append((lid, rows_l, depth + 1))

    return (
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.float64),
        np.asarray(count, dtype=np.int64),
    )


# -------------------------------------------------------------------- SMO

def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float,
    eps: float,
    max_sweeps: int,
):
    """Two-variable coordinate ascent on the soft-margin SVM dual.

    ``K`` is the precomputed kernel Gram matrix and ``y`` the labels as
    +/-1 floats. The decision function is f(x) = sum_i alpha_i y_i
    K(x_i, x) + b. Pair choice is fully deterministic: the standard
    violation check picks the second index, the first index comes from
    the largest error gap (first such index on ties), then from scans of
    the non-bound set and the full range, each starting just past the
    second index and wrapping.

    Returns ``(alpha, b, sweeps, converged)``.
    """
    n = len(y)
    alpha = np.zeros(n, dtype=np.float64)
    b = 0.0
    E = -y.astype(np.float64)  # f is identically 0 before training

    def take_step(i: int, j: int) -> bool:
        nonlocal b
        if i == j:
            return False
        a1o = float(alpha[i])
        a2o = float(alpha[j])
        y1 = float(y[i])
        y2 = float(y[j])
        E1 = float(E[i])
        E2 = float(E[j])
        s = y1 * y2
        if y1 != y2:
            L = max(0.0, a2o - a1o)
            H = min(C, C + a2o - a1o)
        else:
            L = max(0.0, a1o + a2o - C)
            H = min(C, a1o + a2o)
        if L == H:
            return False
        k11 = float(K[i, i])
        k12 = float(K[i, j])
        k22 = float(K[j, j])
        eta = (k11 + k22) - 2.0 * k12
        if eta > 0.0:
            a2 = a2o + y2 * (E1 - E2) / eta
            if a2 < L:
                a2 = L
            elif a2 > H:
                a2 = H
        else:
            # flat or concave direction: evaluate the dual at both ends
            f1 = (E1 + y1) - y1 * a1o * k11 - y2 * a2o * k12 - b
            f2 = (E2 + y2) - y1 * a1o * k12 - y2 * a2o * k22 - b
            L1 = a1o + s * (a2o - L)
            H1 = a1o + s * (a2o - H)
            Lobj = (L1 + L) - 0.5 * k11 * L1 * L1 - 0.5 * k22 * L * L \
                - s * k12 * L1 * L - y1 * L1 * f1 - y2 * L * f2
            Hobj = (H1 + H) - 0.5 * k11 * H1 * H1 - 0.5 * k22 * H * H \
                - s * k12 * H1 * H - y1 * H1 * f1 - y2 * H * f2
            if Lobj > Hobj + eps:
                a2 = L
            elif Lobj < Hobj - eps:
                a2 = H
            else:
                a2 = a2o
        if abs(a2 - a2o) < eps * ((a2 + a2o) + eps):
            return False
        # snap to exact bounds first so bound membership tests stay exact,
        # then derive a1 from the snapped value to preserve the equality
        # constraint
        if a2 < 1e-8:
            a2 = 0.0
        elif a2 > C - 1e-8:
            a2 = C
        a1 = a1o + s * (a2o - a2)
        if a1 < 0.0:
            a1 = 0.0
        elif a1 > C:
            a1 = C
        t1 = y1 * (a1 - a1o)
        t2 = y2 * (a2 - a2o)
        b1 = b - E1 - t1 * k11 - t2 * k12
        b2 = b - E2 - t1 * k12 - t2 * k22
        if 0.0 < a1 < C:
            b_new = b1
        elif 0.0 < a2 < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        db = b_new - b
        # pinned grouping; the compiled backend repeats it exactly
        E[:] = E + ((t1 * K[i]) + (t2 * K[j]) + db)
        alpha[i] = a1
        alpha[j] = a2
        b = b_new
        return True

    def rotated(arr: np.ndarray, j: int):
        pos = int(np.searchsorted(arr, j + 1))
        for k in range(len(arr)):
            yield int(arr[(pos + k) % len(arr)])

    def examine(j: int) -> int:
        y2 = float(y[j])
        a2 = float(alpha[j])
        E2 = float(E[j])
        r2 = E2 * y2
        if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0.0)):
            return 0
        nb = np.flatnonzero((alpha > 0.0) & (alpha < C))
        if len(nb) > 1:
            gaps = np.abs(E[nb] - E2)
            i = int(nb[int(np.argmax(gaps))])
            if take_step(i, j):
                return 1
        for i in rotated(nb, j):
            if take_step(i, j):
                return 1
        for i in rotated(np.arange(n), j):
            if take_step(i, j):
                return 1
        return 0

    sweeps = 0
    converged = False
    examine_all = True
    while sweeps < max_sweeps:
        sweeps += 1
        changed = 0
        if examine_all:
            for j in range(n):
                changed += examine(j)
        else:
            for j in np.flatnonzero((alpha > 0.0) & (alpha < C)):
                changed += examine(int(j))
        if examine_all:
            if changed == 0:
                converged = True
                break
            examine_all = False
        elif changed == 0:
            examine_all = True
    return alpha, b, sweeps, converged
