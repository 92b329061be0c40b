"""Binary threshold queries, query ledgers and adaptive band location."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .model import ValuationProfile, WeakOrder


class BudgetError(RuntimeError):
    """Raised when an algorithm breaks its query contract."""


@dataclass(frozen=True)
class ThresholdQuery:
    agent: int
    object: int
    threshold: float

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")


@dataclass(frozen=True)
class LedgerEntry:
    query: ThresholdQuery
    answer: int
    forced: bool = False


class LedgerMode(enum.Enum):
    ADAPTIVE = "adaptive"
    NON_ADAPTIVE_ONE_PER_PAIR = "non_adaptive_one_per_pair"


def answer(hidden: ValuationProfile, q: ThresholdQuery) -> int:
    """1 iff the hidden value is at least the threshold (exact comparison)."""
    return int(hidden.values[q.agent, q.object] >= q.threshold)


class QueryLedger:
    def __init__(self, mode: LedgerMode = LedgerMode.ADAPTIVE):
        self.mode = mode
        self.entries: list[LedgerEntry] = []
        self._committed = False
        self._planned: set[tuple[int, int]] = set()

    def __len__(self) -> int:
        return len(self.entries)

    def commit(self, queries: Sequence[ThresholdQuery]) -> None:
        """Fix the full query set of a non-adaptive run before any answer."""
        if self.mode is not LedgerMode.NON_ADAPTIVE_ONE_PER_PAIR:
            raise BudgetError("only non-adaptive ledgers take a committed batch")
        if self._committed:
            raise BudgetError("non-adaptive query set already committed")
        pairs = [(q.agent, q.object) for q in queries]
        if len(set(pairs)) != len(pairs):
            raise BudgetError("two queries for the same (agent, object) pair")
        self._planned = set(pairs)
        self._committed = True

    def record(self, q: ThresholdQuery, ans: int, forced: bool = False) -> None:
        if self.mode is LedgerMode.NON_ADAPTIVE_ONE_PER_PAIR:
            pair = (q.agent, q.object)
            if pair not in self._planned:
                raise BudgetError(f"query for pair {pair} was not committed in advance")
            self._planned.discard(pair)
        self.entries.append(LedgerEntry(q, int(ans), forced))

    def per_agent_counts(self, n: int) -> list[int]:
        counts = [0] * n
        for e in self.entries:
            counts[e.query.agent] += 1
        return counts

    def answers(self) -> list[tuple[int, int, float, int]]:
        return [(e.query.agent, e.query.object, e.query.threshold, e.answer) for e in self.entries]

    def to_jsonl(self) -> str:
        lines = []
        for e in self.entries:
            rec = {"agent": e.query.agent + 1, "object": e.query.object + 1,
                   "t": e.query.threshold, "ans": e.answer}
            if e.forced:
                rec["forced"] = True
            lines.append(json.dumps(rec))
        return "\n".join(lines) + ("\n" if lines else "")


class ThresholdOracle:
    """Answers threshold queries about a profile the caller cannot see."""

    def __init__(self, hidden: ValuationProfile):
        self.__hidden = hidden

    @property
    def n(self) -> int:
        return self.__hidden.values.shape[0]

    def ask(self, q: ThresholdQuery, ledger: QueryLedger) -> int:
        if ledger.mode is not LedgerMode.ADAPTIVE:
            raise BudgetError("single queries need an adaptive ledger; use ask_batch")
        ans = answer(self.__hidden, q)
        ledger.record(q, ans)
        return ans

    def ask_batch(self, queries: Sequence[ThresholdQuery], ledger: QueryLedger,
                  forced: Sequence[bool] | None = None) -> list[int]:
        """Commit a whole non-adaptive batch, then answer it."""
        ledger.commit(queries)
        flags = forced if forced is not None else [False] * len(queries)
        out = []
        for q, f in zip(queries, flags):
            ans = answer(self.__hidden, q)
            ledger.record(q, ans, f)
            out.append(ans)
        return out


def band_count(n: int, epsilon: float) -> int:
    """Number of adaptive thresholds, at least 1."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = math.log(n * n / epsilon) / math.log1p(epsilon / 2)
    if abs(x - round(x)) < 1e-12:
        x = round(x)
    return max(1, math.ceil(x))


def adaptive_thresholds(n: int, epsilon: float) -> list[float]:
    ratio = 2.0 / (2.0 + epsilon)
    return [ratio ** k for k in range(1, band_count(n, epsilon) + 1)]


def band_query_budget(c: int, tiers: int) -> int:
    return c * math.ceil(math.log2(tiers + 1))


def locate_bands(oracle: ThresholdOracle, agent: int, order: WeakOrder,
                 thresholds: Sequence[float], ledger: QueryLedger) -> dict[int, int]:
    """Band index per acceptable object: k when the value lies in [t_k, t_(k-1)), 0 below t_c.

    For each threshold a binary search over the tiers finds how many leading
    tiers clear it, starting from where the previous threshold stopped.
    """
    if any(b >= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly descending")
    tiers = order.tiers
    reps = [min(t) for t in tiers]
    bands = [0] * len(tiers)
    done = 0
    for k, t in enumerate(thresholds, start=1):
        lo, hi = done, len(tiers)
        while lo < hi:
            mid = (lo + hi) // 2
            if oracle.ask(ThresholdQuery(agent, reps[mid], t), ledger):
                lo = mid + 1
            else:
                hi = mid
        for idx in range(done, lo):
            bands[idx] = k
        done = lo
    return {o: bands[idx] for idx, tier in enumerate(tiers) for o in tier}
