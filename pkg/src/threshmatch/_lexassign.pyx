# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernel: maximum-weight matching over lexicographic weight vectors.

Weights are rows of a ``(n, n, d)`` float64 array. The first ``d - 1`` entries
are integral key components compared exactly, the last is the real-valued part.
Pairs flagged in ``real`` are edges, the rest are padding with zero weight.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef inline int _cmp(const double* a, const double* b, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(d):
        if a[k] < b[k]:
            return -1
        if a[k] > b[k]:
            return 1
    return 0


cdef void _hungarian(const double[:, :, ::1] w, Py_ssize_t n, Py_ssize_t d,
                     double[:, ::1] u, double[:, ::1] v, Py_ssize_t[::1] col4row,
                     Py_ssize_t[::1] row4col):
    # Shortest augmenting paths on cost = -weight. Keeps u, v dual feasible.
    cdef Py_ssize_t i, j, k, it, cur, sink, best, nrem, sel, tmp
    cdef int less
    cdef double x
    cdef double[:, ::1] spc = np.empty((n, d), dtype=np.float64)
    cdef double[::1] mv = np.zeros(d, dtype=np.float64)
    cdef Py_ssize_t[::1] path = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] remaining = np.empty(n, dtype=np.intp)
    cdef unsigned char[::1] isinf = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] SR = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] SC = np.empty(n, dtype=np.uint8)
    cdef double* minval = &mv[0]

    for cur in range(n):
        for k in range(d):
            minval[k] = 0.0
        for j in range(n):
            remaining[j] = n - 1 - j
            isinf[j] = 1
            SR[j] = 0
            SC[j] = 0
        nrem = n
        sink = -1
        i = cur
        while sink == -1:
            SR[i] = 1
            best = -1
            sel = -1
            for it in range(nrem):
                j = remaining[it]
                if isinf[j]:
                    less = 1
                else:
                    less = 0
                    for k in range(d):
                        x = minval[k] - w[i, j, k] - u[i, k] - v[j, k]
                        if x < spc[j, k]:
                            less = 1
                            break
                        if x > spc[j, k]:
                            break
                if less:
                    for k in range(d):
                        spc[j, k] = minval[k] - w[i, j, k] - u[i, k] - v[j, k]
                    isinf[j] = 0
                    path[j] = i
                if best == -1:
                    best = j
                    sel = it
                else:
                    tmp = _cmp(&spc[j, 0], &spc[best, 0], d)
                    if tmp < 0 or (tmp == 0 and row4col[j] == -1):
                        best = j
                        sel = it
            for k in range(d):
                minval[k] = spc[best, k]
            if row4col[best] == -1:
                sink = best
            else:
                i = row4col[best]
            SC[best] = 1
            nrem -= 1
            remaining[sel] = remaining[nrem]

        for k in range(d):
            u[cur, k] += minval[k]
        for i in range(n):
            if SR[i] and i != cur:
                j = col4row[i]
                for k in range(d):
                    u[i, k] += minval[k] - spc[j, k]
        for j in range(n):
            if SC[j]:
                for k in range(d):
                    v[j, k] -= minval[k] - spc[j, k]
        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            tmp = col4row[i]
            col4row[i] = j
            j = tmp
            if i == cur:
                break


def lex_max_matching(const double[:, :, ::1] weight, const unsigned char[:, ::1] real,
                     double tol=1e-9):
    """Return the lexicographically smallest maximum-weight matching.

    The result maps each agent to an object index or -1. Among all optimal
    matchings the one whose sorted (agent, object) list is smallest wins.
    """
    cdef Py_ssize_t n = weight.shape[0]
    cdef Py_ssize_t d = weight.shape[2]
    cdef Py_ssize_t i, j, k, a, x, y, t, o, head, tail, m
    out = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return out
    cdef double[:, ::1] u = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] v = np.zeros((n, d), dtype=np.float64)
    cdef Py_ssize_t[::1] col4row = np.full(n, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] row4col = np.full(n, -1, dtype=np.intp)
    _hungarian(weight, n, d, u, v, col4row, row4col)

    # Tight pairs carry zero reduced cost; zero pairs carry zero weight.
    cdef unsigned char[:, ::1] tight = np.zeros((n, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] zero = np.zeros((n, n), dtype=np.uint8)
    cdef double r
    cdef int ok
    for i in range(n):
        for j in range(n):
            ok = 1
            for k in range(d - 1):
                if -weight[i, j, k] - u[i, k] - v[j, k] != 0.0:
                    ok = 0
                    break
            if ok:
                r = -weight[i, j, d - 1] - u[i, d - 1] - v[j, d - 1]
                if fabs(r) > tol:
                    ok = 0
            tight[i, j] = ok
            ok = 1
            if real[i, j]:
                for k in range(d - 1):
                    if weight[i, j, k] != 0.0:
                        ok = 0
                        break
                if ok and fabs(weight[i, j, d - 1]) > tol:
                    ok = 0
            zero[i, j] = ok

    cdef double[::1] target = np.zeros(d, dtype=np.float64)
    cdef double[::1] prefix = np.zeros(d, dtype=np.float64)
    for i in range(n):
        for k in range(d):
            target[k] += weight[i, col4row[i], k]

    cdef unsigned char[::1] status = np.zeros(n, dtype=np.uint8)  # 0 open, 1 fixed, 2 unmatched
    cdef unsigned char[::1] seen = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t[::1] nxt = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] queue = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] chain = np.empty(n + 1, dtype=np.intp)

    for i in range(n):
        ok = 1
        for k in range(d - 1):
            if prefix[k] != target[k]:
                ok = 0
                break
        if ok and fabs(prefix[d - 1] - target[d - 1]) <= tol:
            for a in range(i, n):
                status[a] = 2
            break
        t = col4row[i]
        for x in range(n):
            seen[x] = 0
        seen[t] = 1
        queue[0] = t
        head = 0
        tail = 1
        while head < tail:
            y = queue[head]
            head += 1
            for a in range(n):
                if a == i or status[a] == 1 or not tight[a, y]:
                    continue
                if status[a] == 2 and not zero[a, y]:
                    continue
                x = col4row[a]
                if not seen[x]:
                    seen[x] = 1
                    nxt[x] = y
                    queue[tail] = x
                    tail += 1
        o = -1
        for x in range(n):
            if seen[x] and real[i, x] and tight[i, x]:
                o = x
                break
        if o == -1:
            status[i] = 2
            continue
        m = 0
        chain[0] = o
        while chain[m] != t:
            chain[m + 1] = nxt[chain[m]]
            m += 1
        for k in range(m - 1, -1, -1):
            a = row4col[chain[k]]
            col4row[a] = chain[k + 1]
            row4col[chain[k + 1]] = a
        col4row[i] = o
        row4col[o] = i
        status[i] = 1
        for k in range(d):
            prefix[k] += weight[i, o, k]

    for i in range(n):
        if status[i] == 1:
            out[i] = col4row[i]
    return out
