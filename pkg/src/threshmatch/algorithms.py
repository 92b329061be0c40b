"""Matching algorithms: full information, adaptive and non-adaptive elicitation, ordinal baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .elicitation import (LedgerMode, QueryLedger, ThresholdOracle, ThresholdQuery,
                          adaptive_thresholds, locate_bands)
from .model import Instance, Matching, PriorityKind, ValuationProfile, validate, welfare


@dataclass
class AlgoResult:
    matching: Matching
    ledger: QueryLedger
    kind: PriorityKind
    info: dict = field(default_factory=dict)

    def queries_per_agent(self, n: int) -> list[int]:
        return self.ledger.per_agent_counts(n)

    def to_json(self, n: int, valuations: ValuationProfile | None = None) -> dict:
        counts = self.queries_per_agent(n)
        out = {
            "kind": self.kind.value,
            "matching": self.matching.to_list(),
            "queries_per_agent": counts,
            "total_queries": sum(counts),
        }
        if valuations is not None:
            out["welfare"] = welfare(self.matching, valuations)
        out.update({k: v for k, v in self.info.items() if isinstance(v, (int, float, str))})
        return out


def cube_root(n: int) -> float:
    return float(np.cbrt(n))


def half_cube_root_floor(n: int) -> int:
    """Largest k with (2k)^3 <= n, i.e. floor(n^(1/3) / 2) without rounding error."""
    k = 0
    while (2 * (k + 1)) ** 3 <= n:
        k += 1
    return k


def unit_sum_thresholds(n: int) -> list[float]:
    """Per-rank thresholds for the one-query-per-pair unit-sum algorithms."""
    root = cube_root(n)
    out = [1.0 / root]
    out += [1.0 / (min(i, root) * root * root) for i in range(2, n + 1)]
    return out


def unit_range_thresholds(n: int) -> list[float]:
    return [1.0] + [1.0 / math.sqrt(n)] * (n - 1)


def _one_query_per_pair(instance: Instance, oracle: ThresholdOracle, thresholds: list[float],
                        forced_rank1: bool = False) -> tuple[np.ndarray, QueryLedger]:
    """Ask every acceptable pair once at its rank threshold; value part is t on yes."""
    ledger = QueryLedger(LedgerMode.NON_ADAPTIVE_ONE_PER_PAIR)
    ranks = instance.ranks
    pairs = instance.edges()
    queries = [ThresholdQuery(a, o, thresholds[ranks[a, o] - 1]) for a, o in pairs]
    forced = [forced_rank1 and ranks[a, o] == 1 for a, o in pairs]
    answers = oracle.ask_batch(queries, ledger, forced)
    values = np.zeros((instance.n, instance.n))
    for q, ans in zip(queries, answers):
        if ans:
            values[q.agent, q.object] = q.threshold
    return values, ledger


def welfare_optimal_priority(instance: Instance, kind: PriorityKind,
                             valuations: ValuationProfile) -> AlgoResult:
    """Welfare-optimal matching within the class named by ``kind``.

    For Pareto optimality the max-welfare matching is finished with Pareto
    improvements, which cannot lower welfare under consistent values.
    """
    problems = validate(instance, valuations, weak_consistency=True, normalized=False)
    if problems:
        raise ValueError("inconsistent valuations: " + "; ".join(problems[:3]))
    matching = engine.solve_priority(instance, kind, valuations.values)
    if kind is PriorityKind.PARETO:
        matching = engine.pareto_closure(instance, matching)
    return AlgoResult(matching, QueryLedger(), kind)


def adaptive_approx(instance: Instance, kind: PriorityKind, epsilon: float,
                    oracle: ThresholdOracle) -> AlgoResult:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    thresholds = adaptive_thresholds(instance.n, epsilon)
    ledger = QueryLedger(LedgerMode.ADAPTIVE)
    values = np.zeros((instance.n, instance.n))
    for agent, order in enumerate(instance.preferences):
        for obj, band in locate_bands(oracle, agent, order, thresholds, ledger).items():
            if band:
                values[agent, obj] = thresholds[band - 1]
    matching = engine.solve_priority(instance, kind, values)
    if kind is PriorityKind.PARETO:
        matching = engine.ttc(instance, matching)
    return AlgoResult(matching, ledger, kind, {"epsilon": epsilon, "c": len(thresholds)})


def nonadaptive_priority_unit_sum(instance: Instance, kind: PriorityKind,
                                  oracle: ThresholdOracle) -> AlgoResult:
    if not kind.is_priority:
        raise ValueError("use nonadaptive_po_unit_sum for Pareto optimality")
    values, ledger = _one_query_per_pair(instance, oracle, unit_sum_thresholds(instance.n))
    return AlgoResult(engine.solve_priority(instance, kind, values), ledger, kind)


def nonadaptive_po_unit_sum(instance: Instance, oracle: ThresholdOracle) -> AlgoResult:
    n = instance.n
    if n < 8:
        raise ValueError("needs n >= 8 so that the rank bound floor(n^(1/3)/2) is positive")
    values, ledger = _one_query_per_pair(instance, oracle, unit_sum_thresholds(n))
    first = engine.solve_priority(instance, PriorityKind.PARETO, values)
    main = {(a, o) for a, o in first.pairs if values[a, o] > 0}
    has_rank1 = any(instance.ranks[a, o] == 1 for a, o in main)
    k = 1 if has_rank1 else half_cube_root_floor(n)
    aux_full = engine.max_cardinality_rank_bounded(instance, k)
    used_agents = {a for a, _ in main}
    used_objects = {o for _, o in main}
    aux = {(a, o) for a, o in aux_full.pairs if a not in used_agents and o not in used_objects}
    used_agents |= {a for a, _ in aux}
    used_objects |= {o for _, o in aux}
    rest = set()
    for a in range(n):
        if a in used_agents:
            continue
        free = [int(o) for o in np.flatnonzero(instance.ranks[a]) if o not in used_objects]
        if free:
            rest.add((a, free[0]))
            used_objects.add(free[0])
    endowment = Matching(frozenset(main | aux | rest))
    info = {"rank_bound": k, "main_size": len(main), "aux_size": len(aux), "rest_size": len(rest)}
    return AlgoResult(engine.ttc(instance, endowment), ledger, PriorityKind.PARETO, info)


def nonadaptive_unit_range(instance: Instance, kind: PriorityKind,
                           oracle: ThresholdOracle) -> AlgoResult:
    values, ledger = _one_query_per_pair(instance, oracle, unit_range_thresholds(instance.n),
                                         forced_rank1=True)
    matching = engine.solve_priority(instance, kind, values)
    if kind is PriorityKind.PARETO:
        matching = engine.ttc(instance, matching)
    return AlgoResult(matching, ledger, kind)


def ordinal_baseline(instance: Instance, kind: PriorityKind) -> AlgoResult:
    zeros = np.zeros((instance.n, instance.n))
    if kind is PriorityKind.PARETO:
        matching = engine.ttc(instance, engine.solve_priority(instance, PriorityKind.RANK_MAXIMAL, zeros))
    else:
        matching = engine.solve_priority(instance, kind, zeros)
    return AlgoResult(matching, QueryLedger(), kind)
