"""Exact matching solvers over lexicographic composite weights, plus TTC.

The assignment kernel is compiled when available (``threshmatch._lexassign``)
and falls back to a numpy implementation otherwise. Set the environment
variable ``THRESHMATCH_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _lexassign_py
from .model import Instance, Matching, PriorityKind

if os.environ.get("THRESHMATCH_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from . import _lexassign as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
VALUE_TOL = 1e-9


@dataclass(frozen=True)
class CompositeWeight:
    """Integer key compared lexicographically, then a real value."""

    key: tuple[int, ...]
    value: float = 0.0

    def __add__(self, other: "CompositeWeight") -> "CompositeWeight":
        _same_len(self, other)
        return CompositeWeight(tuple(a + b for a, b in zip(self.key, other.key)), self.value + other.value)

    def __sub__(self, other: "CompositeWeight") -> "CompositeWeight":
        _same_len(self, other)
        return CompositeWeight(tuple(a - b for a, b in zip(self.key, other.key)), self.value - other.value)

    def _cmp_tuple(self):
        return (self.key, self.value)

    def __lt__(self, other):
        _same_len(self, other)
        return self._cmp_tuple() < other._cmp_tuple()

    def __le__(self, other):
        _same_len(self, other)
        return self._cmp_tuple() <= other._cmp_tuple()

    def __gt__(self, other):
        return other < self

    def __ge__(self, other):
        return other <= self

    @classmethod
    def zero(cls, length: int) -> "CompositeWeight":
        return cls((0,) * length, 0.0)


def _same_len(a: CompositeWeight, b: CompositeWeight) -> None:
    if len(a.key) != len(b.key):
        raise ValueError("composite weights with different key lengths")


def key_length(kind: PriorityKind, n: int) -> int:
    if kind is PriorityKind.PARETO:
        return 0
    if kind is PriorityKind.RANK_MAXIMAL:
        return n
    return n + 1


def key_slot(kind: PriorityKind, n: int, r: int) -> tuple[int, int]:
    """Key position touched by a rank-``r`` edge and the unit placed there."""
    if kind is PriorityKind.RANK_MAXIMAL:
        return r - 1, 1
    if kind is PriorityKind.MAX_CARD_RANK_MAXIMAL:
        return r, 1
    if kind is PriorityKind.FAIR:
        return n + 1 - r, -1
    raise ValueError("no rank slot for Pareto weights")


def edge_weight(kind: PriorityKind, n: int, r: int, value_part: float) -> CompositeWeight:
    if not 1 <= r <= n:
        raise ValueError(f"rank {r} outside 1..{n}")
    key = [0] * key_length(kind, n)
    if kind is not PriorityKind.PARETO:
        if kind is not PriorityKind.RANK_MAXIMAL:
            key[0] = 1
        pos, unit = key_slot(kind, n, r)
        key[pos] = unit
    return CompositeWeight(tuple(key), float(value_part))


def solve_assignment(weight: np.ndarray, real: np.ndarray, tol: float = VALUE_TOL,
                     backend: str | None = None) -> np.ndarray:
    """Run the kernel on a dense ``(n, n, d)`` weight array.

    Returns ``assignment[agent] = object`` or -1, the lexicographically
    smallest sorted pair list among all maximum-weight matchings.
    """
    weight = np.ascontiguousarray(weight, dtype=np.float64)
    real = np.ascontiguousarray(real, dtype=np.uint8)
    use = backend or BACKEND
    if use == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        return np.asarray(_compiled.lex_max_matching(weight, real, tol))
    return _lexassign_py.lex_max_matching(weight, real, tol)


def max_weight_matching(edges: Iterable[tuple[int, int, CompositeWeight]], n: int | None = None) -> Matching:
    """Maximum-weight matching over composite weights with the canonical tie-break."""
    edges = list(edges)
    if not edges:
        return Matching(frozenset())
    length = len(edges[0][2].key)
    size = max(max(a, o) for a, o, _ in edges) + 1
    if n is not None:
        size = max(size, n)
    weight = np.zeros((size, size, length + 1))
    real = np.zeros((size, size), dtype=np.uint8)
    zero = CompositeWeight.zero(length)
    for a, o, w in edges:
        if len(w.key) != length:
            raise ValueError("composite weights with different key lengths")
        if w < zero:
            raise ValueError(f"negative weight on edge ({a + 1}, {o + 1})")
        if real[a, o]:
            raise ValueError(f"duplicate edge ({a + 1}, {o + 1})")
        weight[a, o, :length] = w.key
        weight[a, o, length] = w.value
        real[a, o] = 1
    return Matching.from_assignment(solve_assignment(weight, real))


def priority_weight_array(instance: Instance, kind: PriorityKind, value_parts: np.ndarray,
                          mask: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Dense equivalent of ``edge_weight`` on every acceptable pair (restricted by ``mask``)."""
    n = instance.n
    ranks = instance.ranks
    real = ranks > 0
    if mask is not None:
        real = real & mask
    length = key_length(kind, n)
    weight = np.zeros((n, n, length + 1))
    if kind is not PriorityKind.PARETO:
        agents, objects = np.nonzero(real)
        r = ranks[agents, objects]
        if kind is PriorityKind.RANK_MAXIMAL:
            weight[agents, objects, r - 1] = 1
        elif kind is PriorityKind.MAX_CARD_RANK_MAXIMAL:
            weight[agents, objects, 0] = 1
            weight[agents, objects, r] = 1
        else:
            weight[agents, objects, 0] = 1
            weight[agents, objects, n + 1 - r] = -1
    weight[:, :, length] = np.where(real, value_parts, 0.0)
    return weight, real


def solve_priority(instance: Instance, kind: PriorityKind, value_parts: np.ndarray,
                   mask: np.ndarray | None = None) -> Matching:
    """Max-weight matching with weights ``edge_weight(kind, n, rank, value_parts[i, o])``."""
    value_parts = np.asarray(value_parts, dtype=np.float64)
    if np.any(value_parts < 0):
        raise ValueError("value parts must be non-negative")
    weight, real = priority_weight_array(instance, kind, value_parts, mask)
    return Matching.from_assignment(solve_assignment(weight, real))


def max_cardinality_rank_bounded(instance: Instance, k: int) -> Matching:
    """Largest matching using only edges of rank at most ``k``."""
    if not 1 <= k <= instance.n:
        raise ValueError(f"k = {k} outside 1..{instance.n}")
    mask = (instance.ranks > 0) & (instance.ranks <= k)
    return solve_priority(instance, PriorityKind.PARETO, mask.astype(float), mask)


def _rank_vector(instance: Instance, assignment: list[int]) -> list[int]:
    worst = instance.n + 1
    return [int(instance.ranks[a, o]) if o >= 0 else worst for a, o in enumerate(assignment)]


def ttc(instance: Instance, endowment: Matching) -> Matching:
    """Top trading cycles on the endowed agents, then a Pareto-improvement closure.

    Each remaining agent points at its best remaining endowed object (lowest
    index among ties), but keeps pointing at its own object when that object
    is among its best. With weak orders plain TTC can stop short of Pareto
    optimality, so the result is finished by ``pareto_closure``.
    """
    if not endowment.is_valid_for(instance):
        raise ValueError("endowment uses an unacceptable pair")
    ranks = instance.ranks
    held = {a: o for a, o in endowment.pairs}
    owner = {o: a for a, o in held.items()}
    remaining = set(held)
    final: dict[int, int] = {}
    while remaining:
        objs = sorted(held[a] for a in remaining)
        point: dict[int, int] = {}
        for a in sorted(remaining):
            acc = [o for o in objs if ranks[a, o] > 0]
            best = min(ranks[a, o] for o in acc)
            if ranks[a, held[a]] == best:
                point[a] = a
            else:
                point[a] = owner[min(o for o in acc if ranks[a, o] == best)]
        start = min(remaining)
        path = []
        pos = {}
        a = start
        while a not in pos:
            pos[a] = len(path)
            path.append(a)
            a = point[a]
        cycle = path[pos[a]:]
        for a in cycle:
            final[a] = held[point[a]]
        for a in cycle:
            remaining.discard(a)
    assignment = [-1] * instance.n
    for a, o in final.items():
        assignment[a] = o
    return pareto_closure(instance, Matching.from_assignment(assignment))


def find_pareto_improvement(instance: Instance, matching: Matching) -> Matching | None:
    """Return a Pareto-improving matching reachable by one trade, or None.

    Agents point at agents whose object they weakly prefer to their own and
    at free objects they weakly prefer. A Pareto improvement exists exactly
    when some strict pointer lies on a cycle or on a path to a free object.
    The returned improvement is the first one found scanning strict pointers
    by (agent, target), which keeps the closure deterministic.
    """
    n = instance.n
    ranks = instance.ranks
    assignment = matching.assignment(n)
    cur = _rank_vector(instance, assignment)
    holder = [-1] * n
    for a, o in enumerate(assignment):
        if o >= 0:
            holder[o] = a
    # node ids: agents 0..n-1, free objects n..2n-1
    succ: list[list[int]] = [[] for _ in range(n)]
    strict: list[tuple[int, int]] = []
    for a in range(n):
        for o in np.flatnonzero(ranks[a]):
            o = int(o)
            if o == assignment[a]:
                continue
            r = int(ranks[a, o])
            if r > cur[a]:
                continue
            target = holder[o] if holder[o] >= 0 else n + o
            succ[a].append(target)
            if r < cur[a]:
                strict.append((a, target))
    if not strict:
        return None

    def path_to(src: int, goal) -> list[int] | None:
        prev = {src: None}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            if goal(x):
                out = [x]
                while prev[out[-1]] is not None:
                    out.append(prev[out[-1]])
                return out[::-1]
            if x >= n:
                continue
            for y in succ[x]:
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        return None

    for a, b in sorted(strict):
        route = path_to(b, lambda x, a=a: x == a or x >= n)
        if route is None:
            continue
        chain = [a] + route
        if chain[-1] == a:
            chain = chain[:-1]
            cyclic = True
        else:
            cyclic = False
        new = list(assignment)
        movers = chain if cyclic else chain[:-1]
        for idx, x in enumerate(movers):
            nxt = chain[(idx + 1) % len(chain)]
            new[x] = nxt - n if nxt >= n else assignment[nxt]
        return Matching.from_assignment(new)
    return None


def pareto_closure(instance: Instance, matching: Matching) -> Matching:
    """Apply Pareto improvements until none is left."""
    while True:
        better = find_pareto_improvement(instance, matching)
        if better is None:
            return matching
        matching = better


def is_pareto_optimal(instance: Instance, matching: Matching) -> bool:
    """Polynomial Pareto-optimality test (the oracle has the enumerative one)."""
    return find_pareto_improvement(instance, matching) is None
