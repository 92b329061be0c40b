"""Brute-force ground truth for small instances.

Everything here enumerates matchings explicitly and shares nothing with the
assignment kernel, so it can referee the engine and the algorithms.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .model import (Instance, Matching, PriorityKind, ValuationProfile, rank_counts,
                    signature_from_counts, welfare)

MAX_ENUM_N = 8
MAX_QUADRATIC_N = 6
BIGINT_MAX_N = 6


class ClassViolation(ValueError):
    """An algorithm returned a matching outside its advertised class."""


@dataclass(frozen=True)
class _Table:
    assign: np.ndarray   # (M, n) object per agent, -1 unmatched
    ranks: np.ndarray    # (M, n) rank per agent, n + 1 unmatched
    counts: np.ndarray   # (M, n) agents matched at rank 1..n


def _guard(instance: Instance, limit: int) -> None:
    if instance.n > limit:
        raise ValueError(f"oracle limited to n <= {limit}, got n = {instance.n}")


@functools.lru_cache(maxsize=256)
def _table(instance: Instance) -> _Table:
    _guard(instance, MAX_ENUM_N)
    n = instance.n
    ranks = instance.ranks
    rows = np.zeros((1, 0), dtype=np.int8)
    used = np.zeros(1, dtype=np.int64)
    for a in range(n):
        parts = [np.hstack([rows, np.full((rows.shape[0], 1), -1, dtype=np.int8)])]
        masks = [used]
        for o in np.flatnonzero(ranks[a]):
            free = (used >> o) & 1 == 0
            sub = rows[free]
            parts.append(np.hstack([sub, np.full((sub.shape[0], 1), o, dtype=np.int8)]))
            masks.append(used[free] | (1 << int(o)))
        rows = np.vstack(parts)
        used = np.concatenate(masks)
    assign = rows.astype(np.int64)
    padded = np.hstack([ranks, np.zeros((n, 1), dtype=np.int64)])
    r = padded[np.arange(n)[None, :], assign]
    r[assign < 0] = n + 1
    counts = np.stack([(r == k).sum(axis=1) for k in range(1, n + 1)], axis=1) if n else np.zeros((1, 0))
    for arr in (assign, r, counts):
        arr.setflags(write=False)
    return _Table(assign, r, counts)


def enumerate_matchings(instance: Instance) -> Iterator[Matching]:
    """Every matching of the instance exactly once, the empty one included."""
    for row in _table(instance).assign:
        yield Matching.from_assignment(row)


def count_matchings(instance: Instance) -> int:
    return _table(instance).assign.shape[0]


def _rank_row(instance: Instance, matching: Matching) -> np.ndarray:
    if not matching.is_valid_for(instance):
        raise ValueError("matching uses an unacceptable pair")
    row = np.full(instance.n, instance.n + 1, dtype=np.int64)
    for a, o in matching.pairs:
        row[a] = instance.ranks[a, o]
    return row


def _dominated(table_ranks: np.ndarray, row: np.ndarray) -> bool:
    weak = np.all(table_ranks <= row, axis=1)
    strict = np.any(table_ranks < row, axis=1)
    return bool(np.any(weak & strict))


def is_pareto_optimal(instance: Instance, matching: Matching) -> bool:
    """True iff no enumerated matching weakly improves everyone and strictly someone."""
    table = _table(instance)
    return not _dominated(table.ranks, _rank_row(instance, matching))


def _dominated_rows(table_ranks: np.ndarray, rows: np.ndarray, budget: int = 1 << 22) -> np.ndarray:
    """Dominance of each of ``rows`` against the whole table, in broadcast chunks."""
    m, n = table_ranks.shape
    step = max(1, budget // max(1, m * max(n, 1)))
    out = np.empty(rows.shape[0], dtype=bool)
    for lo in range(0, rows.shape[0], step):
        chunk = rows[lo:lo + step, None, :]
        weak = np.all(table_ranks[None] <= chunk, axis=2)
        strict = np.any(table_ranks[None] < chunk, axis=2)
        out[lo:lo + step] = np.any(weak & strict, axis=1)
    return out


def pareto_optimal_mask(instance: Instance) -> np.ndarray:
    """Pareto optimality of every enumerated matching (quadratic)."""
    _guard(instance, MAX_QUADRATIC_N)
    ranks = _table(instance).ranks
    return ~_dominated_rows(ranks, ranks)


def _signatures(instance: Instance, kind: PriorityKind) -> np.ndarray:
    counts = _table(instance).counts
    total = counts.sum(axis=1, keepdims=True)
    if kind is PriorityKind.RANK_MAXIMAL:
        return counts
    if kind is PriorityKind.MAX_CARD_RANK_MAXIMAL:
        return np.hstack([total, counts])
    if kind is PriorityKind.FAIR:
        return np.hstack([total, -counts[:, ::-1]])
    raise ValueError("Pareto optimality has no signature")


def _lex_best_rows(sigs: np.ndarray) -> np.ndarray:
    cand = np.arange(sigs.shape[0])
    for k in range(sigs.shape[1]):
        col = sigs[cand, k]
        cand = cand[col == col.max()]
    return cand


def best_signature(instance: Instance, kind: PriorityKind) -> tuple[int, ...]:
    sigs = _signatures(instance, kind)
    return tuple(int(x) for x in sigs[_lex_best_rows(sigs)[0]])


def class_members(instance: Instance, kind: PriorityKind) -> list[Matching]:
    if kind is PriorityKind.PARETO:
        idx = np.flatnonzero(pareto_optimal_mask(instance))
    else:
        idx = _lex_best_rows(_signatures(instance, kind))
    assign = _table(instance).assign
    return [Matching.from_assignment(assign[i]) for i in idx]


def _welfare_column(instance: Instance, valuations: ValuationProfile) -> np.ndarray:
    n = instance.n
    assign = _table(instance).assign
    padded = np.hstack([valuations.values, np.zeros((n, 1))])
    return padded[np.arange(n)[None, :], assign].sum(axis=1)


@dataclass(frozen=True)
class ClassOptimum:
    kind: PriorityKind
    best_matching: Matching
    best_welfare: float
    class_size: int | None


def optimal_within_class(instance: Instance, valuations: ValuationProfile, kind: PriorityKind,
                         count_class: bool = False) -> ClassOptimum:
    """Welfare-best matching of the class, by enumeration.

    Pareto classes are scanned in decreasing welfare order, stopping at the
    first undominated matching; their size is only counted on request because
    that needs the quadratic dominance sweep.
    """
    table = _table(instance)
    w = _welfare_column(instance, valuations)
    if kind is PriorityKind.PARETO:
        order = np.argsort(-w, kind="stable")
        best = None
        for lo in range(0, order.size, 64):
            idx = order[lo:lo + 64]
            free = np.flatnonzero(~_dominated_rows(table.ranks, table.ranks[idx]))
            if free.size:
                best = idx[free[0]]
                break
        size = int(pareto_optimal_mask(instance).sum()) if count_class else None
    else:
        members = _lex_best_rows(_signatures(instance, kind))
        best = members[np.argmax(w[members])]
        size = int(members.size)
    matching = Matching.from_assignment(table.assign[best])
    return ClassOptimum(kind, matching, welfare(matching, valuations), size)


def in_class(instance: Instance, matching: Matching, kind: PriorityKind) -> bool:
    if kind is PriorityKind.PARETO:
        return is_pareto_optimal(instance, matching)
    counts = rank_counts(instance, matching)
    return signature_from_counts(kind, counts) == best_signature(instance, kind)


def welfare_loss_ratio(result, instance: Instance, valuations: ValuationProfile) -> float:
    """Class-optimal welfare over the result's welfare (1 when both vanish)."""
    if not in_class(instance, result.matching, result.kind):
        raise ClassViolation(f"matching is not {result.kind.value}")
    best = optimal_within_class(instance, valuations, result.kind).best_welfare
    got = welfare(result.matching, valuations)
    if got == 0:
        return 1.0 if best == 0 else float("inf")
    return best / got


def priority_vector(kind: PriorityKind, n: int) -> tuple[int, ...]:
    """Literal integer priorities p_1..p_n of the three priority classes."""
    if kind is PriorityKind.RANK_MAXIMAL:
        return tuple(n ** (2 * (n - j + 1)) for j in range(1, n + 1))
    if kind is PriorityKind.MAX_CARD_RANK_MAXIMAL:
        return tuple(n ** (2 * n) + n ** (2 * (n - j)) for j in range(1, n + 1))
    if kind is PriorityKind.FAIR:
        return tuple(4 * n ** (2 * n) - 2 * n ** (j - 1) for j in range(1, n + 1))
    raise ValueError("Pareto optimality uses the all-zero priority vector")


def exact_max_weight(weights: list[list]) -> list[int]:
    """Exact Hungarian method on a square matrix of ints/Fractions (maximization).

    Returns ``assignment[row] = column`` for a maximum-weight perfect
    assignment; callers pad non-edges with 0.
    """
    n = len(weights)
    if n == 0:
        return []
    big = max(abs(x) for row in weights for x in row) + 1
    cost = [[big - x for x in row] for row in weights]
    u = [Fraction(0)] * (n + 1)
    v = [Fraction(0)] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = None
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    out = [0] * n
    for j in range(1, n + 1):
        out[p[j] - 1] = j - 1
    return out


def bigint_priority_matching(instance: Instance, kind: PriorityKind,
                             valuations: ValuationProfile | None = None) -> Matching:
    """Max-weight matching under literal integer priorities plus value / (n + 1)."""
    _guard(instance, BIGINT_MAX_N)
    n = instance.n
    p = priority_vector(kind, n)
    scale = Fraction(1, n + 1)
    weights = []
    for a in range(n):
        row = []
        for o in range(n):
            r = int(instance.ranks[a, o])
            if r == 0:
                row.append(Fraction(0))
                continue
            val = Fraction(float(valuations.values[a, o])) if valuations is not None else Fraction(0)
            row.append(p[r - 1] + val * scale)
        weights.append(row)
    assignment = exact_max_weight(weights)
    return Matching(frozenset((a, o) for a, o in enumerate(assignment) if instance.ranks[a, o] > 0))


def bigint_priority_check(instance: Instance, kind: PriorityKind,
                          valuations: ValuationProfile | None = None, tol: float = 1e-9) -> bool:
    """Does the composite-weight solver agree with the literal big-integer encoding?"""
    from .algorithms import ordinal_baseline, welfare_optimal_priority

    exact = bigint_priority_matching(instance, kind, valuations)
    if valuations is None:
        fast = ordinal_baseline(instance, kind).matching
        return rank_counts(instance, exact) == rank_counts(instance, fast)
    fast = welfare_optimal_priority(instance, kind, valuations).matching
    same_sig = rank_counts(instance, exact) == rank_counts(instance, fast)
    return same_sig and abs(welfare(exact, valuations) - welfare(fast, valuations)) <= tol


def priority_argmax_equals_class(instance: Instance, kind: PriorityKind) -> bool:
    """Matchings with maximal literal priority sum are exactly the signature-best ones."""
    _guard(instance, BIGINT_MAX_N)
    p = np.array(priority_vector(kind, instance.n), dtype=object)
    counts = _table(instance).counts.astype(object)
    totals = counts.dot(p) if instance.n else np.zeros(1, dtype=object)
    top = max(totals)
    argmax = {i for i, t in enumerate(totals) if t == top}
    best = set(_lex_best_rows(_signatures(instance, kind)).tolist())
    return argmax == best
