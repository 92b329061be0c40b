"""Pure-Python (numpy) fallback for the compiled assignment kernel.

Same contract as ``threshmatch._lexassign.lex_max_matching``; used when the
extension is not built or when ``THRESHMATCH_PURE_PYTHON`` is set.
"""
from __future__ import annotations

from collections import deque

import numpy as np


def _lex_argmin(rows: np.ndarray, prefer: np.ndarray) -> int:
    """Index of the lexicographically smallest row; ``prefer`` breaks exact ties."""
    cand = np.arange(rows.shape[0])
    for k in range(rows.shape[1]):
        col = rows[cand, k]
        cand = cand[col == col.min()]
        if cand.size == 1:
            return int(cand[0])
    free = cand[prefer[cand]]
    return int(free[0] if free.size else cand[0])


def _lex_less(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise strict lexicographic ``a < b``."""
    diff = a - b
    nz = diff != 0
    first = nz.argmax(axis=1)
    picked = diff[np.arange(diff.shape[0]), first]
    return nz.any(axis=1) & (picked < 0)


def _hungarian(cost: np.ndarray):
    n, _, d = cost.shape
    u = np.zeros((n, d))
    v = np.zeros((n, d))
    col4row = np.full(n, -1, dtype=np.intp)
    row4col = np.full(n, -1, dtype=np.intp)
    for cur in range(n):
        spc = np.zeros((n, d))
        isinf = np.ones(n, dtype=bool)
        path = np.full(n, -1, dtype=np.intp)
        remaining = np.ones(n, dtype=bool)
        rows_seen = [cur]
        cols_seen = []
        minval = np.zeros(d)
        i = cur
        while True:
            rem = np.flatnonzero(remaining)
            r = minval + cost[i, rem] - u[i] - v[rem]
            better = isinf[rem] | _lex_less(r, spc[rem])
            upd = rem[better]
            spc[upd] = r[better]
            isinf[upd] = False
            path[upd] = i
            pick = rem[_lex_argmin(spc[rem], row4col[rem] == -1)]
            minval = spc[pick].copy()
            remaining[pick] = False
            cols_seen.append(pick)
            if row4col[pick] == -1:
                sink = pick
                break
            i = row4col[pick]
            rows_seen.append(i)
        u[cur] += minval
        for i in rows_seen[1:]:
            u[i] += minval - spc[col4row[i]]
        cs = np.array(cols_seen, dtype=np.intp)
        v[cs] -= minval - spc[cs]
        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur:
                break
    return u, v, col4row, row4col


def lex_max_matching(weight: np.ndarray, real: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Return the lexicographically smallest maximum-weight matching (agent -> object or -1)."""
    weight = np.ascontiguousarray(weight, dtype=np.float64)
    real = np.asarray(real, dtype=bool)
    n = weight.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return out
    d = weight.shape[2]
    cost = -weight
    u, v, col4row, row4col = _hungarian(cost)

    reduced = cost - u[:, None, :] - v[None, :, :]
    tight = np.all(reduced[:, :, :-1] == 0, axis=2) & (np.abs(reduced[:, :, -1]) <= tol)
    zero = ~real | (np.all(weight[:, :, :-1] == 0, axis=2) & (np.abs(weight[:, :, -1]) <= tol))

    target = weight[np.arange(n), col4row].sum(axis=0)
    prefix = np.zeros(d)
    status = np.zeros(n, dtype=np.int8)  # 0 open, 1 fixed, 2 unmatched
    for i in range(n):
        if np.array_equal(prefix[:-1], target[:-1]) and abs(prefix[-1] - target[-1]) <= tol:
            status[i:] = 2
            break
        t = col4row[i]
        movable = (status == 0)[:, None] & tight | (status == 2)[:, None] & tight & zero
        movable[i] = False
        seen = np.zeros(n, dtype=bool)
        nxt = np.full(n, -1, dtype=np.intp)
        seen[t] = True
        queue = deque([t])
        while queue:
            y = queue.popleft()
            for a in np.flatnonzero(movable[:, y]):
                x = col4row[a]
                if not seen[x]:
                    seen[x] = True
                    nxt[x] = y
                    queue.append(x)
        options = np.flatnonzero(seen & real[i] & tight[i])
        if options.size == 0:
            status[i] = 2
            continue
        o = int(options[0])
        chain = [o]
        while chain[-1] != t:
            chain.append(int(nxt[chain[-1]]))
        owners = [int(row4col[x]) for x in chain[:-1]]
        for a, y in zip(owners, chain[1:]):
            col4row[a] = y
            row4col[y] = a
        col4row[i] = o
        row4col[o] = i
        status[i] = 1
        prefix += weight[i, o]
    fixed = status == 1
    out[fixed] = col4row[fixed]
    return out
