# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: CART tree growth and the SMO solver.

Statement-for-statement mirror of the pure backend. Every
floating-point expression keeps the same grouping as the pure code and
the extension is compiled with contraction disabled, so both backends
produce bit-identical models. Sorting uses a stable merge sort, which
orders value ties exactly like the stable argsort on the pure side.
"""

import numpy as np

from libc.math cimport fabs, INFINITY

BACKEND_NAME = "native"

ctypedef unsigned long long u64
ctypedef long long i64

# splitmix64 constants exceed 2**63; bind them under the GIL at import
cdef u64 _GOLDEN = <u64>0x9E3779B97F4A7C15
cdef u64 _MIX1 = <u64>0xBF58476D1CE4E5B9
cdef u64 _MIX2 = <u64>0x94D049BB133111EB


cdef inline u64 _mix_next(u64* state) noexcept nogil:
    # splitmix64 step
    cdef u64 z
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    z = z ^ (z >> 31)
    return z


cdef void _msort_pairs(double* val, i64* lab, double* tv, i64* tl, Py_ssize_t m) noexcept nogil:
    # bottom-up stable merge sort of (val, lab) pairs by val; <= keeps the
    # earlier element on ties, matching a stable argsort
    cdef Py_ssize_t width = 1
    cdef Py_ssize_t lo, mid, hi, a, b, o, t
    while width < m:
        lo = 0
        while lo < m:
            mid = lo + width
            if mid > m:
                mid = m
            hi = lo + 2 * width
            if hi > m:
                hi = m
            a = lo
            b = mid
            o = lo
            while a < mid and b < hi:
                if val[a] <= val[b]:
                    tv[o] = val[a]
                    tl[o] = lab[a]
                    a += 1
                else:
                    tv[o] = val[b]
                    tl[o] = lab[b]
                    b += 1
                o += 1
            while a < mid:
                tv[o] = val[a]
                tl[o] = lab[a]
                a += 1
                o += 1
            while b < hi:
                tv[o] = val[b]
                tl[o] = lab[b]
                b += 1
                o += 1
            lo = lo + 2 * width
        for t in range(m):
            val[t] = tv[t]
            lab[t] = tl[t]
        width = width * 2


# ------------------------------------------------------------------ trees

def grow_tree(
    X,
    y,
    seed,
    max_depth,
    min_leaf,
    max_features,
    bootstrap=True,
):
    """Grow one binary CART classifier tree (compiled twin of the pure kernel).

    Same contract: parallel node arrays ``(feature, threshold, left,
    right, value, count)``; ``feature == -1`` marks a leaf.
    """
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const i64[::1] yv = np.ascontiguousarray(y, dtype=np.int64)
    cdef Py_ssize_t n = Xv.shape[0]
    cdef Py_ssize_t d = Xv.shape[1]
    cdef int maxdep = max_depth
    cdef Py_ssize_t minleaf = min_leaf
    cdef Py_ssize_t mf = max_features
    cdef bint boot = bootstrap
    cdef u64 state = <u64>(int(seed) & ((1 << 64) - 1))

    cdef Py_ssize_t cap = 2 * n + 3
    fa = np.full(cap, -1, dtype=np.int64)
    ta = np.zeros(cap, dtype=np.float64)
    la = np.full(cap, -1, dtype=np.int64)
    ra = np.full(cap, -1, dtype=np.int64)
    va = np.zeros(cap, dtype=np.float64)
    ca = np.zeros(cap, dtype=np.int64)
    cdef i64[::1] feature = fa
    cdef double[::1] threshold = ta
    cdef i64[::1] left = la
    cdef i64[::1] right = ra
    cdef double[::1] value = va
    cdef i64[::1] count = ca

    rows_a = np.empty(n, dtype=np.int64)
    tmp_a = np.empty(n, dtype=np.int64)
    sval_a = np.empty(n, dtype=np.float64)
    slab_a = np.empty(n, dtype=np.int64)
    tval_a = np.empty(n, dtype=np.float64)
    tlab_a = np.empty(n, dtype=np.int64)
    pool_a = np.empty(d, dtype=np.int64)
    feats_a = np.empty(d, dtype=np.int64)
    sn_a = np.empty(cap, dtype=np.int64)
    slo_a = np.empty(cap, dtype=np.int64)
    shi_a = np.empty(cap, dtype=np.int64)
    sde_a = np.empty(cap, dtype=np.int64)
    cdef i64[::1] rows = rows_a
    cdef i64[::1] tmp = tmp_a
    cdef double[::1] sval = sval_a
    cdef i64[::1] slab = slab_a
    cdef double[::1] tval = tval_a
    cdef i64[::1] tlab = tlab_a
    cdef i64[::1] pool = pool_a
    cdef i64[::1] feats = feats_a
    cdef i64[::1] snode = sn_a
    cdef i64[::1] slo = slo_a
    cdef i64[::1] shi = shi_a
    cdef i64[::1] sdep = sde_a

    cdef Py_ssize_t i, t, k, fi, f, lo, hi, m, nl, nr, nl_cnt, node, lid, rid
    cdef Py_ssize_t ncnt, top, nf
    cdef int depth
    cdef i64 n1, cum, c1l, c0l, c1r, c0r, key
    cdef u64 r
    cdef double best_score, best_thr, score, thr, svi, svi1
    cdef Py_ssize_t best_f

    with nogil:
        if boot:
            for i in range(n):
                r = _mix_next(&state)
                rows[i] = <i64>(r % <u64>n)
        else:
            for i in range(n):
                rows[i] = i

        ncnt = 1  # root pre-allocated with leaf defaults
        snode[0] = 0
        slo[0] = 0
        shi[0] = n
        sdep[0] = 0
        top = 1

        while top > 0:
            top -= 1
            node = snode[top]
            lo = slo[top]
            hi = shi[top]
            depth = <int>sdep[top]
            m = hi - lo
            n1 = 0
            for t in range(lo, hi):
                n1 += yv[rows[t]]
            value[node] = (<double>n1) / (<double>m)
            count[node] = m
            if depth >= maxdep or m < 2 * minleaf or n1 == 0 or n1 == m:
                continue

            if mf >= d:
                nf = d
                for t in range(d):
                    feats[t] = t
            else:
                # partial Fisher-Yates, then sort so ties resolve toward
                # the lowest feature index
                nf = mf
                for t in range(d):
                    pool[t] = t
                for t in range(mf):
                    r = _mix_next(&state)
                    k = t + <Py_ssize_t>(r % <u64>(d - t))
                    key = pool[t]
                    pool[t] = pool[k]
                    pool[k] = key
                for t in range(mf):
                    feats[t] = pool[t]
                # insertion sort (mf is small)
                for t in range(1, mf):
                    key = feats[t]
                    k = t - 1
                    while k >= 0 and feats[k] > key:
                        feats[k + 1] = feats[k]
                        k -= 1
                    feats[k + 1] = key

            best_score = -INFINITY
            best_f = -1
            best_thr = 0.0
            for fi in range(nf):
                f = feats[fi]
                for t in range(m):
                    sval[t] = Xv[rows[lo + t], f]
                    slab[t] = yv[rows[lo + t]]
                _msort_pairs(&sval[0], &slab[0], &tval[0], &tlab[0], m)
                cum = 0
                for i in range(m - 1):
                    cum += slab[i]
                    if sval[i] != sval[i + 1]:
                        nl = i + 1
                        nr = m - nl
                        if nl >= minleaf and nr >= minleaf:
                            c1l = cum
                            c0l = nl - c1l
                            c1r = n1 - c1l
                            c0r = nr - c1r
                            score = (<double>(c1l * c1l + c0l * c0l)) / (<double>nl) \
                                + (<double>(c1r * c1r + c0r * c0r)) / (<double>nr)
                            if score > best_score:
                                best_score = score
                                svi = sval[i]
                                svi1 = sval[i + 1]
                                thr = 0.5 * (svi + svi1)
                                if thr >= svi1:
                                    # midpoint rounded onto the upper value;
                                    # fall back so `x <= thr` still cuts here
                                    thr = svi
                                best_f = f
                                best_thr = thr
            if best_f < 0:
                continue

            # stable partition of the segment: left block then right block,
            # both in original segment order
            nl_cnt = 0
            for t in range(lo, hi):
                if Xv[rows[t], best_f] <= best_thr:
                    tmp[nl_cnt] = rows[t]
                    nl_cnt += 1
            k = nl_cnt
            for t in range(lo, hi):
                if not (Xv[rows[t], best_f] <= best_thr):
                    tmp[k] = rows[t]
                    k += 1
            for t in range(m):
                rows[lo + t] = tmp[t]

            lid = ncnt
            ncnt += 1
            rid = ncnt
            ncnt += 1
            feature[node] = best_f
            threshold[node] = best_thr
            left[node] = lid
            right[node] = rid
            snode[top] = rid
            slo[top] = lo + nl_cnt
            shi[top] = hi
            sdep[top] = depth + 1
            top += 1
            snode[top] = lid
            slo[top] = lo
            shi[top] = lo + nl_cnt
            sdep[top] = depth + 1
            top += 1

    return (
        fa[:ncnt].copy(),
        ta[:ncnt].copy(),
        la[:ncnt].copy(),
        ra[:ncnt].copy(),
        va[:ncnt].copy(),
        ca[:ncnt].copy(),
    )


# -------------------------------------------------------------------- SMO

cdef struct SmoState:
    double b
    double C
    double tol
    double eps


cdef bint _take_step(
    Py_ssize_t i,
    Py_ssize_t j,
    const double[:, ::1] K,
    const double[::1] y,
    double[::1] alpha,
    double[::1] E,
    SmoState* st,
    Py_ssize_t n,
) noexcept nogil:
    cdef double a1o, a2o, y1, y2, E1, E2, s, L, H, k11, k12, k22, eta
    cdef double a1, a2, f1, f2, L1, H1, Lobj, Hobj, t1, t2, b1, b2, b_new, db
    cdef double C = st.C
    cdef double eps = st.eps
    cdef Py_ssize_t t
    if i == j:
        return False
    a1o = alpha[i]
    a2o = alpha[j]
    y1 = y[i]
    y2 = y[j]
    E1 = E[i]
    E2 = E[j]
    s = y1 * y2
    if y1 != y2:
        L = 0.0 if (a2o - a1o) < 0.0 else (a2o - a1o)
        H = C if (C + a2o - a1o) > C else (C + a2o - a1o)
    else:
        L = 0.0 if (a1o + a2o - C) < 0.0 else (a1o + a2o - C)
        H = C if (a1o + a2o) > C else (a1o + a2o)
    if L == H:
        return False
    k11 = K[i, i]
    k12 = K[i, j]
    k22 = K[j, j]
    eta = (k11 + k22) - 2.0 * k12
    if eta > 0.0:
        a2 = a2o + y2 * (E1 - E2) / eta
        if a2 < L:
            a2 = L
        elif a2 > H:
            a2 = H
    else:
        # flat or concave direction: evaluate the dual at both ends
        f1 = (E1 + y1) - y1 * a1o * k11 - y2 * a2o * k12 - st.b
        f2 = (E2 + y2) - y1 * a1o * k12 - y2 * a2o * k22 - st.b
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
    if fabs(a2 - a2o) < eps * ((a2 + a2o) + eps):
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
    b1 = st.b - E1 - t1 * k11 - t2 * k12
    b2 = st.b - E2 - t1 * k12 - t2 * k22
    if 0.0 < a1 < C:
        b_new = b1
    elif 0.0 < a2 < C:
        b_new = b2
    else:
        b_new = 0.5 * (b1 + b2)
    db = b_new - st.b
    # pinned grouping, identical to the pure backend
    for t in range(n):
        E[t] = E[t] + (((t1 * K[i, t]) + (t2 * K[j, t])) + db)
    alpha[i] = a1
    alpha[j] = a2
    st.b = b_new
    return True


cdef int _examine(
    Py_ssize_t j,
    const double[:, ::1] K,
    const double[::1] y,
    double[::1] alpha,
    double[::1] E,
    SmoState* st,
    i64[::1] nb,
    Py_ssize_t n,
) noexcept nogil:
    cdef double y2 = y[j]
    cdef double a2 = alpha[j]
    cdef double E2 = E[j]
    cdef double r2 = E2 * y2
    cdef double C = st.C
    cdef double tol = st.tol
    cdef Py_ssize_t nnb = 0
    cdef Py_ssize_t t, i, pos, k
    cdef double gap, best_gap
    if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0.0)):
        return 0
    for t in range(n):
        if alpha[t] > 0.0 and alpha[t] < C:
            nb[nnb] = t
            nnb += 1
    if nnb > 1:
        # largest error gap, first index on ties
        best_gap = -1.0
        i = -1
        for t in range(nnb):
            gap = fabs(E[nb[t]] - E2)
            if gap > best_gap:
                best_gap = gap
                i = nb[t]
        if _take_step(i, j, K, y, alpha, E, st, n):
            return 1
    # scan the non-bound set starting just past j, wrapping
    pos = nnb
    for t in range(nnb):
        if nb[t] >= j + 1:
            pos = t
            break
    for k in range(nnb):
        i = nb[(pos + k) % nnb]
        if _take_step(i, j, K, y, alpha, E, st, n):
            return 1
    # then the full range, same rotation
    for k in range(n):
        i = (j + 1 + k) % n
        if _take_step(i, j, K, y, alpha, E, st, n):
            return 1
    return 0


def smo_solve(
    K,
    y,
    C,
    tol,
    eps,
    max_sweeps,
):
    """Two-variable dual ascent, compiled twin of the pure SMO kernel.

    Returns ``(alpha, b, sweeps, converged)``.
    """
    cdef const double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    alpha_a = np.zeros(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_a
    E_a = np.empty(n, dtype=np.float64)
    cdef double[::1] E = E_a
    nb_a = np.empty(n, dtype=np.int64)
    cdef i64[::1] nb = nb_a
    sweep_a = np.empty(n, dtype=np.int64)
    cdef i64[::1] sweep_idx = sweep_a

    cdef SmoState st
    st.b = 0.0
    st.C = C
    st.tol = tol
    st.eps = eps
    cdef int sweeps = 0
    cdef int maxsw = max_sweeps
    cdef bint converged = False
    cdef bint examine_all = True
    cdef int changed
    cdef Py_ssize_t j, t, nsel

    with nogil:
        for t in range(n):
            E[t] = -yv[t]  # f is identically 0 before training
        while sweeps < maxsw:
            sweeps += 1
            changed = 0
            if examine_all:
                for j in range(n):
                    changed += _examine(j, Kv, yv, alpha, E, &st, nb, n)
            else:
                nsel = 0
                for t in range(n):
                    if alpha[t] > 0.0 and alpha[t] < st.C:
                        sweep_idx[nsel] = t
                        nsel += 1
                for t in range(nsel):
                    changed += _examine(sweep_idx[t], Kv, yv, alpha, E, &st, nb, n)
            if examine_all:
                if changed == 0:
                    converged = True
                    break
                examine_all = False
            elif changed == 0:
                examine_all = True

    return alpha_a, float(st.b), int(sweeps), bool(converged)
