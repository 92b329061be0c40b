import json
import math

import pytest

from threshmatch.elicitation import (BudgetError, LedgerMode, QueryLedger, ThresholdOracle, ThresholdQuery,
                                     adaptive_thresholds, answer, band_count, band_query_budget, locate_bands)
from threshmatch.model import ValuationKind, ValuationProfile, WeakOrder

HIDDEN = ValuationProfile(ValuationKind.UNIT_SUM, [[0.5, 0.3, 0.2], [0.7, 0.3, 0.0], [1.0, 0.0, 0.0]])


def test_answer_is_inclusive():
    assert answer(HIDDEN, ThresholdQuery(0, 0, 0.5)) == 1
    assert answer(HIDDEN, ThresholdQuery(0, 0, 0.5000001)) == 0


def test_query_threshold_range():
    with pytest.raises(ValueError):
        ThresholdQuery(0, 0, 1.5)
    with pytest.raises(ValueError):
        ThresholdQuery(0, 0, -0.1)


def test_adaptive_ledger_records_in_order():
    ledger = QueryLedger()
    oracle = ThresholdOracle(HIDDEN)
    assert oracle.ask(ThresholdQuery(1, 0, 0.6), ledger) == 1
    assert oracle.ask(ThresholdQuery(1, 0, 0.8), ledger) == 0
    assert ledger.answers() == [(1, 0, 0.6, 1), (1, 0, 0.8, 0)]
    assert ledger.per_agent_counts(3) == [0, 2, 0]
    with pytest.raises(BudgetError):
        oracle.ask_batch([ThresholdQuery(0, 0, 0.1)], ledger)


def test_non_adaptive_ledger_is_one_per_pair():
    oracle = ThresholdOracle(HIDDEN)
    ledger = QueryLedger(LedgerMode.NON_ADAPTIVE_ONE_PER_PAIR)
    with pytest.raises(BudgetError):
        oracle.ask_batch([ThresholdQuery(0, 0, 0.1), ThresholdQuery(0, 0, 0.2)], ledger)
    ledger = QueryLedger(LedgerMode.NON_ADAPTIVE_ONE_PER_PAIR)
    assert oracle.ask_batch([ThresholdQuery(0, 0, 0.1), ThresholdQuery(2, 1, 0.1)], ledger, [True, False]) == [1, 0]
    with pytest.raises(BudgetError):
        oracle.ask_batch([ThresholdQuery(1, 1, 0.1)], ledger)
    with pytest.raises(BudgetError):
        oracle.ask(ThresholdQuery(1, 1, 0.1), ledger)
    with pytest.raises(BudgetError):
        ledger.record(ThresholdQuery(1, 2, 0.1), 0)


def test_jsonl_is_one_based_and_marks_forced():
    oracle = ThresholdOracle(HIDDEN)
    ledger = QueryLedger(LedgerMode.NON_ADAPTIVE_ONE_PER_PAIR)
    oracle.ask_batch([ThresholdQuery(0, 0, 1.0), ThresholdQuery(0, 1, 0.25)], ledger, [True, False])
    lines = [json.loads(x) for x in ledger.to_jsonl().splitlines()]
    assert lines == [{"agent": 1, "object": 1, "t": 1.0, "ans": 0, "forced": True},
                     {"agent": 1, "object": 2, "t": 0.25, "ans": 1}]
    assert QueryLedger().to_jsonl() == ""


def test_oracle_hides_the_profile():
    oracle = ThresholdOracle(HIDDEN)
    assert oracle.n == 3
    public = [name for name in dir(oracle) if not name.startswith("_")]
    assert not any(isinstance(getattr(oracle, name), ValuationProfile) for name in public)


def test_band_count_formula():
    for n, eps in [(4, 0.1), (5, 0.5), (6, 1.0), (10, 2.0), (2, 3.0)]:
        assert band_count(n, eps) == math.ceil(math.log(n * n / eps) / math.log(1 + eps / 2))
    # n = 2, eps = 2: the ratio is log 2 / log 2 = 1 exactly
    assert band_count(2, 2.0) == 1
    with pytest.raises(ValueError):
        band_count(3, 0)


def test_adaptive_thresholds_are_geometric():
    ts = adaptive_thresholds(4, 1.0)
    assert len(ts) == band_count(4, 1.0)
    assert ts[0] == pytest.approx(2 / 3)
    assert all(b == pytest.approx(a * 2 / 3) for a, b in zip(ts, ts[1:]))


def test_band_query_budget():
    assert band_query_budget(5, 1) == 5
    assert band_query_budget(5, 3) == 10
    assert band_query_budget(2, 4) == 6


def test_locate_bands_places_each_tier():
    order = WeakOrder.strict([0, 1, 2])
    hidden = ValuationProfile(ValuationKind.UNIT_SUM, [[0.6, 0.3, 0.1], [1, 0, 0], [1, 0, 0]])
    ledger = QueryLedger()
    thresholds = [0.5, 0.25, 0.125]
    bands = locate_bands(ThresholdOracle(hidden), 0, order, thresholds, ledger)
    assert bands == {0: 1, 1: 2, 2: 0}
    assert len(ledger) <= band_query_budget(3, 3)


def test_locate_bands_ties_share_one_query():
    order = WeakOrder((frozenset({1, 2}), frozenset({0})))
    hidden = ValuationProfile(ValuationKind.UNIT_SUM, [[0.2, 0.4, 0.4], [1, 0, 0], [1, 0, 0]])
    ledger = QueryLedger()
    bands = locate_bands(ThresholdOracle(hidden), 0, order, [0.3, 0.15], ledger)
    assert bands == {1: 1, 2: 1, 0: 2}
    assert {e.query.object for e in ledger.entries} <= {0, 1}


def test_locate_bands_rejects_unsorted_thresholds():
    with pytest.raises(ValueError):
        locate_bands(ThresholdOracle(HIDDEN), 0, WeakOrder.strict([0]), [0.2, 0.5], QueryLedger())
