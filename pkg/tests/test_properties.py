"""Hypothesis-driven invariants over random small instances."""
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from threshmatch import engine, oracle
from threshmatch.algorithms import (nonadaptive_priority_unit_sum, nonadaptive_unit_range, ordinal_baseline,
                                    unit_sum_thresholds, welfare_optimal_priority)
from threshmatch.elicitation import (QueryLedger, ThresholdOracle, adaptive_thresholds, band_count,
                                     locate_bands)
from threshmatch.generate import gen_random_instance, random_case
from threshmatch.model import (PRIORITY_KINDS, Matching, PriorityKind, ValuationKind, ValuationProfile, WeakOrder,
                               rank_counts, signature, welfare)

SETTINGS = settings(max_examples=80, deadline=None)

seeds = st.integers(0, 2 ** 32 - 1)
small_n = st.integers(2, 6)
tie = st.sampled_from([0.0, 0.3, 0.6])
accept = st.sampled_from([0.5, 0.8, 1.0])
kinds = st.sampled_from(list(PriorityKind))
priority_kinds = st.sampled_from(PRIORITY_KINDS)
vkinds = st.sampled_from(list(ValuationKind))


@SETTINGS
@given(seeds, small_n, tie, accept)
def test_ranks_follow_tiers(seed, n, t, p):
    inst = gen_random_instance(seed, n, t, p)
    for a, order in enumerate(inst.preferences):
        seen = 0
        for tier in order.tiers:
            assert {inst.rank(a, o) for o in tier} == {seen + 1}
            seen += len(tier)


@SETTINGS
@given(seeds, small_n, priority_kinds)
def test_signature_sums_to_matching_size(seed, n, kind):
    inst = gen_random_instance(seed, n, 0.3, 0.7)
    m = ordinal_baseline(inst, kind).matching
    counts = rank_counts(inst, m)
    assert sum(counts) == len(m)
    sig = signature(inst, m, kind)
    if kind is not PriorityKind.RANK_MAXIMAL:
        assert sig[0] == len(m)


@SETTINGS
@given(seeds, small_n, kinds, vkinds)
def test_full_information_is_class_optimal(seed, n, kind, vk):
    inst, val = random_case(seed, n, vk)
    res = welfare_optimal_priority(inst, kind, val)
    assert oracle.in_class(inst, res.matching, kind)
    best = oracle.optimal_within_class(inst, val, kind).best_welfare
    assert abs(welfare(res.matching, val) - best) <= 1e-9


@SETTINGS
@given(seeds, small_n, vkinds, st.floats(1.0, 3.0))
def test_welfare_grows_with_scaled_values(seed, n, vk, factor):
    inst, val = random_case(seed, n, vk)
    scaled = ValuationProfile(vk, val.values * factor)
    m = welfare_optimal_priority(inst, PriorityKind.PARETO, val).matching
    assert welfare(m, scaled) >= welfare(m, val) - 1e-12


@SETTINGS
@given(seeds, st.integers(2, 8), st.floats(0.05, 3.0))
def test_bands_are_monotone_in_the_order(seed, n, eps):
    inst, val = random_case(seed, n, ValuationKind.UNIT_SUM)
    thresholds = adaptive_thresholds(n, eps)
    assert len(thresholds) == band_count(n, eps)
    handle = ThresholdOracle(val)
    for a, order in enumerate(inst.preferences):
        bands = locate_bands(handle, a, order, thresholds, QueryLedger())
        seq = [bands[min(t)] for t in order.tiers]
        nonzero = [b for b in seq if b]
        assert nonzero == sorted(nonzero)
        assert all(b == 0 for b in seq[len(nonzero):])
        for o, b in bands.items():
            v = val.values[a, o]
            if b:
                assert v >= thresholds[b - 1]
                assert b == 1 or v < thresholds[b - 2]
            else:
                assert v < thresholds[-1]


@SETTINGS
@given(seeds, st.integers(2, 9), priority_kinds)
def test_non_adaptive_ledgers_ask_each_pair_once(seed, n, kind):
    inst, val = random_case(seed, n, ValuationKind.UNIT_SUM)
    res = nonadaptive_priority_unit_sum(inst, kind, ThresholdOracle(val))
    pairs = [(e.query.agent, e.query.object) for e in res.ledger.entries]
    assert sorted(pairs) == sorted(inst.edges())
    ts = unit_sum_thresholds(n)
    assert all(e.query.threshold == ts[inst.ranks[e.query.agent, e.query.object] - 1] for e in res.ledger.entries)


@SETTINGS
@given(seeds, st.integers(2, 6), priority_kinds)
def test_unit_range_ledger(seed, n, kind):
    inst, val = random_case(seed, n, ValuationKind.UNIT_RANGE)
    res = nonadaptive_unit_range(inst, kind, ThresholdOracle(val))
    assert len({(e.query.agent, e.query.object) for e in res.ledger.entries}) == len(res.ledger) == len(inst.edges())


@st.composite
def endowments(draw):
    seed = draw(seeds)
    n = draw(small_n)
    inst = gen_random_instance(seed, n, draw(tie), draw(accept))
    perm = draw(st.permutations(range(n)))
    keep = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    pairs = frozenset((a, o) for a, (o, k) in enumerate(zip(perm, keep)) if k and inst.ranks[a, o] > 0)
    return inst, Matching(pairs)


@SETTINGS
@given(endowments())
def test_ttc_is_individually_rational_and_pareto_optimal(case):
    inst, endowment = case
    out = engine.ttc(inst, endowment)
    for a, o in endowment.pairs:
        assert out.partner(a) is not None
        assert inst.ranks[a, out.partner(a)] <= inst.ranks[a, o]
    assert oracle.is_pareto_optimal(inst, out)
    assert engine.is_pareto_optimal(inst, out)


@SETTINGS
@given(endowments())
def test_polynomial_and_enumerative_pareto_checks_agree(case):
    inst, m = case
    assert engine.is_pareto_optimal(inst, m) == oracle.is_pareto_optimal(inst, m)


@SETTINGS
@given(seeds, st.integers(2, 5), tie, accept)
def test_pareto_and_priority_classes_have_many_good_ranks(seed, n, t, p):
    inst = gen_random_instance(seed, n, t, p)
    members = list(oracle.class_members(inst, PriorityKind.PARETO))
    members += [oracle.class_members(inst, k)[0] for k in PRIORITY_KINDS]
    for m in members:
        for k in range(1, n // 2 + 1):
            good = sum(1 for a, o in m.pairs if inst.ranks[a, o] <= k)
            assert good >= min(k, len(m))


@SETTINGS
@given(seeds, st.integers(2, 7), st.integers(1, 7))
def test_rank_bounded_matching_is_maximum(seed, n, k):
    assume(k <= n)
    inst = gen_random_instance(seed, n, 0.3, 0.6)
    m = engine.max_cardinality_rank_bounded(inst, k)
    assert all(inst.ranks[a, o] <= k for a, o in m.pairs)
    if n <= 6:
        best = max(sum(1 for a, o in x.pairs if inst.ranks[a, o] <= k)
                   for x in oracle.enumerate_matchings(inst))
        assert len(m) == best


@SETTINGS
@given(seeds, small_n, vkinds)
def test_baseline_guarantees_a_rank_one_agent(seed, n, vk):
    inst, val = random_case(seed, n, vk)
    for kind in PriorityKind:
        m = ordinal_baseline(inst, kind).matching
        assert rank_counts(inst, m)[0] >= 1
        floor = 1 / n if vk is ValuationKind.UNIT_SUM else 1.0
        assert welfare(m, val) >= floor - 1e-12


def test_strict_single_agent_edge_case():
    inst = gen_random_instance(0, 1)
    assert inst.preferences[0] == WeakOrder.strict([0])
    for kind in PriorityKind:
        assert len(ordinal_baseline(inst, kind).matching) == 1
    assert math.isclose(float(np.sum(inst.ranks)), 1.0)
