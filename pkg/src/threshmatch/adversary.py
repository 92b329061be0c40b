"""Lower-bound instances and the adversarial valuation picker for one-query-per-pair algorithms.

Agents come in blocks of five. Every agent ranks h_1 first; block i ranks
h_(i+1) second and the leftover agents rank h_(n-1) second. From the
thresholds an algorithm asks, each block gets a type and two special agents
whose two candidate utility functions answer every asked query the same way.
The picker then gives the low-value function to whichever special agent the
algorithm matched to the block's second object.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algorithms import AlgoResult, welfare_optimal_priority
from .elicitation import BudgetError, LedgerMode, QueryLedger, ThresholdOracle
from .model import Instance, Matching, PriorityKind, ValuationKind, ValuationProfile, WeakOrder, welfare

NEVER_ASKED = math.inf
MIN_N = 18
BLOCK = 5

Algorithm = Callable[[Instance, ThresholdOracle], AlgoResult]


class AgentType(enum.IntEnum):
    TYPE1 = 1
    TYPE2 = 2
    TYPE3 = 3
    TYPE4 = 4


def default_epsilon(n: int) -> float:
    return 1.0 / (2 * n ** 4)


def _check_n(n: int) -> None:
    if n < MIN_N:
        raise ValueError(f"the construction needs n >= {MIN_N}, got {n}")


def block_count(n: int) -> int:
    return n // BLOCK


def build_lb_instance(n: int) -> Instance:
    """Preference skeleton shared by both valuation kinds."""
    _check_n(n)
    k = block_count(n)
    prefs = []
    for a in range(n):
        second = a // BLOCK + 1 if a < BLOCK * k else n - 2
        rest = [o for o in range(n) if o not in (0, second)]
        prefs.append(WeakOrder.strict([0, second] + rest))
    return Instance(n, tuple(prefs))


def build_lb_instance_unit_sum(n: int) -> Instance:
    return build_lb_instance(n)


def utility_bank_unit_sum(n: int, epsilon: float | None = None) -> list[tuple[float, float, float]]:
    """u_0..u_8 as (first, second, every other object)."""
    _check_n(n)
    eps = default_epsilon(n) if epsilon is None else epsilon
    if not 0 < eps < 1 / n ** 4:
        raise ValueError("epsilon must lie in (0, 1/n^4)")
    c1 = 1 / math.sqrt(n)
    c2 = 1 / (2 * (n - 2))
    c3 = (1 - c1) / (n - 2)
    return [
        (c1 * c1 + eps / 2, c1 * c1, c1 * c1 - c2 * eps),
        (1 - c1, c1, 0.0),
        (0.5 + eps, 0.5 - eps, 0.0),
        (0.5 - c1 - eps, c1 + eps, c2),
        (0.25 + eps, 0.25 - eps, c2),
        (1 - c1 * c1, c1 * c1, 0.0),
        (1 - c1 + eps, c1 - eps, 0.0),
        (c1 - c1 * c1, c1 * c1, c3),
        (3 * c1 / 4, c1 / 4, c3),
    ]


def utility_bank_unit_range(n: int, epsilon: float | None = None) -> list[tuple[float, float, float]]:
    _check_n(n)
    eps = default_epsilon(n) if epsilon is None else epsilon
    if not 0 < eps < 1 / n ** 4:
        raise ValueError("epsilon must lie in (0, 1/n^4)")
    c1 = 1 / math.sqrt(n)
    seconds = [c1 * c1, c1, 0.5, c1 + eps, 0.25 - eps, c1 * c1, c1 - eps, c1 * c1, c1 / 4]
    return [(1.0, s, 0.0) for s in seconds]


def build_lb_instance_unit_range(n: int) -> tuple[Instance, list[tuple[float, float, float]]]:
    return build_lb_instance(n), utility_bank_unit_range(n)


def _bank(n: int, kind: ValuationKind, epsilon: float | None):
    if kind is ValuationKind.UNIT_SUM:
        return utility_bank_unit_sum(n, epsilon)
    return utility_bank_unit_range(n, epsilon)


def profile_from_labels(instance: Instance, bank, labels: list[int], kind: ValuationKind) -> ValuationProfile:
    """Lay utility function ``bank[labels[a]]`` onto agent a's order."""
    n = instance.n
    values = np.zeros((n, n))
    for a, order in enumerate(instance.preferences):
        first, second, other = bank[labels[a]]
        values[a, :] = other
        objs = order.ordered()
        values[a, objs[0]] = first
        values[a, objs[1]] = second
    return ValuationProfile(kind, values)


def threshold_matrix(instance: Instance, ledger: QueryLedger) -> np.ndarray:
    """T[a, r-1] is the threshold asked about agent a's rank-r object."""
    if ledger.mode is not LedgerMode.NON_ADAPTIVE_ONE_PER_PAIR:
        raise BudgetError("the adversary needs a one-query-per-pair ledger")
    T = np.full((instance.n, instance.n), NEVER_ASKED)
    for e in ledger.entries:
        r = instance.rank(e.query.agent, e.query.object)
        if r is None:
            raise BudgetError("query about an unacceptable pair")
        if T[e.query.agent, r - 1] != NEVER_ASKED:
            raise BudgetError("two queries for the same pair")
        T[e.query.agent, r - 1] = e.query.threshold
    return T


def agent_type(t1: float, t2: float, n: int) -> AgentType:
    """Region of (T_1, T_2); a never-asked threshold behaves like one above 1."""
    c1 = 1 / math.sqrt(n)
    if t2 <= c1:
        return AgentType.TYPE1 if t1 < 0.5 else AgentType.TYPE2
    return AgentType.TYPE3 if t1 < c1 else AgentType.TYPE4


@dataclass(frozen=True)
class BlockInfo:
    index: int                 # 0-based block number; its second object is index + 1
    block_type: AgentType
    specials: tuple[int, int]  # default owners of u_(2j-1) and u_(2j)


def classify_blocks(instance: Instance, T: np.ndarray) -> list[BlockInfo]:
    n = instance.n
    types = [agent_type(T[a, 0], T[a, 1], n) for a in range(n)]
    out = []
    for b in range(block_count(n)):
        members = range(BLOCK * b, BLOCK * (b + 1))
        j = next(t for t in AgentType if sum(types[a] == t for a in members) >= 2)
        first, second = [a for a in members if types[a] == j][:2]
        out.append(BlockInfo(b, j, (first, second)))
    return out


def canonical_labels(n: int, blocks: list[BlockInfo]) -> list[int]:
    labels = [0] * n
    for blk in blocks:
        labels[blk.specials[0]] = 2 * blk.block_type - 1
        labels[blk.specials[1]] = 2 * blk.block_type
    return labels


def adversarial_labels(n: int, blocks: list[BlockInfo], matching: Matching) -> list[int]:
    """Give the low-value function to the special agent holding the block's second object."""
    labels = canonical_labels(n, blocks)
    for blk in blocks:
        first, second = blk.specials
        if matching.partner(second) == blk.index + 1:
            labels[first], labels[second] = labels[second], labels[first]
    return labels


def adversarial_profile(instance: Instance, T: np.ndarray, matching: Matching,
                        kind: ValuationKind = ValuationKind.UNIT_SUM,
                        epsilon: float | None = None) -> ValuationProfile:
    if not matching.is_valid_for(instance):
        raise ValueError("matching is inconsistent with the instance")
    blocks = classify_blocks(instance, T)
    labels = adversarial_labels(instance.n, blocks, matching)
    return profile_from_labels(instance, _bank(instance.n, kind, epsilon), labels, kind)


@dataclass
class AdversaryReport:
    n: int
    kind: PriorityKind
    valuation_kind: ValuationKind
    type_counts: tuple[int, int, int, int]
    others: int
    sw_alg: float
    sw_opt: float
    ratio: float
    sqrt_bound: float
    opt_lower_bound: float | None
    alg_upper_bound: float | None
    indistinguishable: bool
    seconds: float = 0.0
    labels: list[int] = field(default_factory=list, repr=False)

    @property
    def opt_above_sqrt_bound(self) -> bool:
        return self.sw_opt >= self.sqrt_bound

    @property
    def alg_below_upper_bound(self) -> bool | None:
        return None if self.alg_upper_bound is None else self.sw_alg <= self.alg_upper_bound + 1e-12

    def row(self) -> dict:
        n1, n2, n3, n4 = self.type_counts
        return {
            "n": self.n, "kind": self.kind.value, "valuation_kind": self.valuation_kind.value,
            "n1": n1, "n2": n2, "n3": n3, "n4": n4, "Z": self.others,
            "sw_alg": self.sw_alg, "sw_opt": self.sw_opt, "ratio": self.ratio,
            "sqrt_n_over_28": self.sqrt_bound, "opt_lower_bound": self.opt_lower_bound, "alg_upper_bound": self.alg_upper_bound,
            "opt_above_sqrt_bound": self.opt_above_sqrt_bound,
            "indistinguishable": self.indistinguishable,
        }


def _block_welfare_bounds(n: int, counts, others: int, eps: float) -> tuple[float, float]:
    c1 = 1 / math.sqrt(n)
    c2 = 1 / (2 * (n - 2))
    n1, n2, n3, n4 = counts
    lower = ((c1 * c1 + eps / 2) + (0.5 - eps) * n1 + (0.25 - eps) * n2 + (c1 - eps) * n3
             + (c1 / 4) * n4 + (c1 * c1 - c2 * eps) * others)
    upper = 1 + c1 * n1 + (c1 + eps) * n2 + c1 * c1 * n3 + c1 * c1 * n4 + c1 * c1 * others
    return lower, upper


def run_adversary(algorithm: Algorithm, n: int, kind: PriorityKind,
                  valuation_kind: ValuationKind = ValuationKind.UNIT_SUM,
                  epsilon: float | None = None) -> AdversaryReport:
    """Probe the algorithm, pick the adversarial profile, replay, and score it."""
    start = time.perf_counter()
    eps = default_epsilon(n) if epsilon is None else epsilon
    instance = build_lb_instance(n)
    bank = _bank(n, valuation_kind, eps)

    probe = algorithm(instance, ThresholdOracle(profile_from_labels(instance, bank, [0] * n, valuation_kind)))
    T = threshold_matrix(instance, probe.ledger)
    blocks = classify_blocks(instance, T)

    seed = profile_from_labels(instance, bank, canonical_labels(n, blocks), valuation_kind)
    first = algorithm(instance, ThresholdOracle(seed))
    if not np.array_equal(threshold_matrix(instance, first.ledger), T):
        raise BudgetError("query thresholds changed with the answers")

    labels = adversarial_labels(n, blocks, first.matching)
    picked = profile_from_labels(instance, bank, labels, valuation_kind)
    replay = algorithm(instance, ThresholdOracle(picked))
    same = (first.ledger.answers() == replay.ledger.answers() and first.matching == replay.matching)

    sw_alg = welfare(first.matching, picked)
    sw_opt = welfare(welfare_optimal_priority(instance, kind, picked).matching, picked)
    counts = tuple(sum(b.block_type == t for b in blocks) for t in AgentType)
    others = n - 2 * len(blocks)
    lower = upper = None
    if valuation_kind is ValuationKind.UNIT_SUM:
        lower, upper = _block_welfare_bounds(n, counts, others, eps)
    ratio = sw_opt / sw_alg if sw_alg > 0 else math.inf
    return AdversaryReport(n, kind, valuation_kind, counts, others, sw_alg, sw_opt, ratio,
                           math.sqrt(n) / 28, lower, upper, same,
                           time.perf_counter() - start, labels)
