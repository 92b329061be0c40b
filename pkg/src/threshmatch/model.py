"""Instances, weak orders, valuations, matchings and rank signatures.

Agents and objects are 0-based internally. The JSON format is 1-based.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SUM_TOL = 1e-9


class PriorityKind(enum.Enum):
    PARETO = "pareto"
    RANK_MAXIMAL = "rank_maximal"
    MAX_CARD_RANK_MAXIMAL = "max_card_rank_maximal"
    FAIR = "fair"

    @property
    def is_priority(self) -> bool:
        return self is not PriorityKind.PARETO


PRIORITY_KINDS = (PriorityKind.RANK_MAXIMAL, PriorityKind.MAX_CARD_RANK_MAXIMAL, PriorityKind.FAIR)


class ValuationKind(enum.Enum):
    UNIT_SUM = "unit_sum"
    UNIT_RANGE = "unit_range"


@dataclass(frozen=True)
class WeakOrder:
    """Acceptable objects grouped into tiers, best tier first."""

    tiers: tuple[frozenset[int], ...]

    def __post_init__(self):
        tiers = tuple(frozenset(t) for t in self.tiers)
        if any(not t for t in tiers):
            raise ValueError("empty tier")
        seen: set[int] = set()
        for t in tiers:
            if seen & t:
                raise ValueError("object listed twice")
            seen |= t
        object.__setattr__(self, "tiers", tiers)

    @classmethod
    def strict(cls, objects: Iterable[int]) -> "WeakOrder":
        return cls(tuple(frozenset([o]) for o in objects))

    @property
    def acceptable(self) -> frozenset[int]:
        return frozenset().union(*self.tiers) if self.tiers else frozenset()

    def ordered(self) -> list[int]:
        """Acceptable objects best first, ascending index inside a tier."""
        return [o for t in self.tiers for o in sorted(t)]


@dataclass(frozen=True)
class Instance:
    n: int
    preferences: tuple[WeakOrder, ...]
    _ranks: np.ndarray = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        prefs = tuple(self.preferences)
        if len(prefs) != self.n:
            raise ValueError(f"expected {self.n} preference lists, got {len(prefs)}")
        ranks = np.zeros((self.n, self.n), dtype=np.int64)
        for i, order in enumerate(prefs):
            if not order.tiers:
                raise ValueError(f"agent {i + 1} has an empty acceptable set")
            count = 0
            for tier in order.tiers:
                for o in tier:
                    if not 0 <= o < self.n:
                        raise ValueError(f"agent {i + 1}: object {o + 1} out of range")
                    ranks[i, o] = count + 1
                count += len(tier)
        ranks.setflags(write=False)
        object.__setattr__(self, "preferences", prefs)
        object.__setattr__(self, "_ranks", ranks)

    @property
    def ranks(self) -> np.ndarray:
        """``ranks[i, o]`` is the rank of ``o`` for agent ``i``, 0 when unacceptable."""
        return self._ranks

    def rank(self, agent: int, obj: int) -> int | None:
        """Rank of ``obj`` for ``agent``, or None when unacceptable."""
        r = int(self._ranks[agent, obj])
        return r or None

    def acceptable(self, agent: int) -> frozenset[int]:
        return self.preferences[agent].acceptable

    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(o)) for i, o in zip(*np.nonzero(self._ranks))]

    def prefers(self, agent: int, a: int | None, b: int | None) -> bool:
        """Strict preference of ``agent`` for ``a`` over ``b`` (None is unmatched)."""
        return _rank_or_worst(self, agent, a) < _rank_or_worst(self, agent, b)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "preferences": [[sorted(o + 1 for o in t) for t in p.tiers] for p in self.preferences],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        n = int(data["n"])
        prefs = tuple(
            WeakOrder(tuple(frozenset(int(o) - 1 for o in tier) for tier in tiers))
            for tiers in data["preferences"]
        )
        return cls(n, prefs)


def _rank_or_worst(instance: Instance, agent: int, obj: int | None) -> int:
    if obj is None:
        return instance.n + 1
    r = int(instance.ranks[agent, obj])
    if r == 0:
        raise ValueError(f"object {obj + 1} is unacceptable to agent {agent + 1}")
    return r


@dataclass(frozen=True)
class ValuationProfile:
    kind: ValuationKind
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("valuations must be an n x n matrix")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        return (isinstance(other, ValuationProfile) and self.kind == other.kind
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def value(self, agent: int, obj: int) -> float:
        return float(self.values[agent, obj])


@dataclass(frozen=True)
class Matching:
    """A set of (agent, object) pairs, each agent and object used at most once."""

    pairs: frozenset[tuple[int, int]]

    def __post_init__(self):
        pairs = frozenset((int(a), int(o)) for a, o in self.pairs)
        agents = [a for a, _ in pairs]
        objects = [o for _, o in pairs]
        if len(set(agents)) != len(agents) or len(set(objects)) != len(objects):
            raise ValueError("not a matching")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_assignment(cls, assignment: Sequence[int]) -> "Matching":
        """Build from ``assignment[agent] = object`` with -1 meaning unmatched."""
        return cls(frozenset((a, int(o)) for a, o in enumerate(assignment) if o >= 0))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def partner(self, agent: int) -> int | None:
        for a, o in self.pairs:
            if a == agent:
                return o
        return None

    def owner(self, obj: int) -> int | None:
        for a, o in self.pairs:
            if o == obj:
                return a
        return None

    def assignment(self, n: int) -> list[int]:
        out = [-1] * n
        for a, o in self.pairs:
            out[a] = o
        return out

    def to_list(self) -> list[list[int]]:
        """1-based sorted pair list."""
        return [[a + 1, o + 1] for a, o in sorted(self.pairs)]

    def is_valid_for(self, instance: Instance) -> bool:
        n = instance.n
        return all(0 <= a < n and 0 <= o < n and instance.ranks[a, o] > 0 for a, o in self.pairs)


def rank_counts(instance: Instance, matching: Matching) -> tuple[int, ...]:
    """``(s_1, ..., s_n)``: number of agents matched at each rank."""
    counts = [0] * instance.n
    for a, o in matching.pairs:
        r = instance.rank(a, o)
        if r is None:
            raise ValueError(f"pair ({a + 1}, {o + 1}) is not an edge")
        counts[r - 1] += 1
    return tuple(counts)


def signature_from_counts(kind: PriorityKind, counts: Sequence[int]) -> tuple[int, ...]:
    counts = tuple(int(c) for c in counts)
    if kind is PriorityKind.RANK_MAXIMAL:
        return counts
    if kind is PriorityKind.MAX_CARD_RANK_MAXIMAL:
        return (sum(counts),) + counts
    if kind is PriorityKind.FAIR:
        return (sum(counts),) + tuple(-c for c in reversed(counts))
    raise ValueError("Pareto optimality has no signature")


def signature(instance: Instance, matching: Matching, kind: PriorityKind) -> tuple[int, ...]:
    return signature_from_counts(kind, rank_counts(instance, matching))


def welfare(matching: Matching, valuations: ValuationProfile) -> float:
    return math.fsum(valuations.values[a, o] for a, o in sorted(matching.pairs))


def validate(instance: Instance, valuations: ValuationProfile | None = None,
             *, weak_consistency: bool = False, normalized: bool = True) -> list[str]:
    """Return a list of violations; empty means valid.

    With ``weak_consistency`` strictly ordered objects may share a value, but
    values may never increase down the order and tied objects must agree.
    ``normalized=False`` skips the unit-sum / unit-range checks.
    """
    problems: list[str] = []
    for i, order in enumerate(instance.preferences):
        if not order.acceptable:
            problems.append(f"agent {i + 1}: empty acceptable set")
    if valuations is None:
        return problems
    v = valuations.values
    if v.shape != (instance.n, instance.n):
        return problems + [f"valuation shape {v.shape} does not match n = {instance.n}"]
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        problems.append("valuations must be finite and non-negative")
    for i, order in enumerate(instance.preferences):
        row = v[i]
        acc = order.acceptable
        outside = [o for o in range(instance.n) if o not in acc and row[o] != 0]
        if outside:
            problems.append(f"agent {i + 1}: non-zero value on unacceptable object {outside[0] + 1}")
        tier_vals = []
        for tier in order.tiers:
            vals = {float(row[o]) for o in tier}
            if len(vals) > 1:
                problems.append(f"agent {i + 1}: tied objects with different values")
            tier_vals.append((max(vals), min(vals)))
        for (_, lo), (hi, _) in zip(tier_vals, tier_vals[1:]):
            if hi > lo or (not weak_consistency and hi == lo):
                problems.append(f"agent {i + 1}: values not consistent with the order")
                break
        if not normalized:
            continue
        if valuations.kind is ValuationKind.UNIT_SUM:
            total = math.fsum(row)
            if abs(total - 1.0) > SUM_TOL:
                problems.append(f"agent {i + 1}: values sum to {total!r}")
        else:
            if len(order.tiers) < 2:
                problems.append(f"agent {i + 1}: unit-range needs two distinct tiers")
            accv = [row[o] for o in acc]
            if accv and (abs(max(accv) - 1.0) > SUM_TOL or abs(min(accv)) > SUM_TOL):
                problems.append(f"agent {i + 1}: acceptable values must span [0, 1]")
    return problems


def load_instance(path) -> tuple[Instance, ValuationProfile | None]:
    with open(path) as fh:
        return instance_from_json(json.load(fh))


def instance_from_json(data: dict) -> tuple[Instance, ValuationProfile | None]:
    instance = Instance.from_dict(data)
    val = data.get("valuations")
    profile = None
    if val is not None:
        profile = ValuationProfile(ValuationKind(val["kind"]), np.array(val["values"], dtype=float))
    return instance, profile


def instance_to_json(instance: Instance, valuations: ValuationProfile | None = None) -> dict:
    data = instance.to_dict()
    if valuations is not None:
        data["valuations"] = {"kind": valuations.kind.value, "values": valuations.values.tolist()}
    return data
