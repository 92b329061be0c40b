import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cases import example7, matching_1based, strict_instance
from threshmatch import engine
from threshmatch.engine import CompositeWeight, edge_weight, max_weight_matching, solve_assignment
from threshmatch.model import Instance, Matching, PriorityKind, WeakOrder, rank_counts

BACKENDS = ["python"] + (["compiled"] if engine.BACKEND == "compiled" else [])


def brute_lex_max(weight, real, tol=1e-9):
    """Exhaustive reference: max total weight, then the smallest sorted pair list."""
    n = weight.shape[0]
    best, best_key = None, None

    def rec(i, used, cur):
        nonlocal best, best_key
        if i == n:
            total = sum((weight[a, o] for a, o in cur), np.zeros(weight.shape[2]))
            key, val = tuple(total[:-1]), total[-1]
            pairs = sorted(cur)
            if (best is None or key > best_key[0]
                    or (key == best_key[0] and val > best_key[1] + tol)):
                best, best_key = pairs, (key, val)
            elif key == best_key[0] and abs(val - best_key[1]) <= tol and pairs < best:
                best = pairs
            return
        rec(i + 1, used, cur)
        for o in range(n):
            if real[i, o] and o not in used:
                rec(i + 1, used | {o}, cur + [(i, o)])

    rec(0, frozenset(), [])
    out = [-1] * n
    for a, o in best:
        out[a] = o
    return out


def random_weights(rng, n, d):
    real = np.array([[rng.random() < 0.6 for _ in range(n)] for _ in range(n)], dtype=np.uint8)
    w = np.zeros((n, n, d))
    for a in range(n):
        for o in range(n):
            if not real[a, o]:
                continue
            key = [rng.choice([0, 0, 1, -1]) for _ in range(d - 1)]
            if tuple(key) < (0,) * (d - 1):
                key = [-k for k in key]
            w[a, o, :d - 1] = key
            w[a, o, d - 1] = rng.choice([0.0, 0.25, 0.5, 1.0, rng.random()])
    return w, real


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernel_matches_brute_force(backend):
    rng = random.Random(1)
    for _ in range(300):
        n, d = rng.randint(1, 5), rng.randint(1, 4)
        w, real = random_weights(rng, n, d)
        assert list(solve_assignment(w, real, backend=backend)) == brute_lex_max(w, real)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 5), st.integers(1, 4))
def test_backends_agree(seed, n, d):
    w, real = random_weights(random.Random(seed), n, d)
    outs = {tuple(solve_assignment(w, real, backend=b)) for b in BACKENDS}
    assert len(outs) == 1


def test_kernel_frozen_cases():
    # 2x2, value only: cross pairs sum to 1.5 against 1.1 on the diagonal
    w = np.array([[[1.0], [0.9]], [[0.6], [0.1]]])
    real = np.ones((2, 2), dtype=np.uint8)
    for b in BACKENDS:
        assert list(solve_assignment(w, real, backend=b)) == [1, 0]
    # all-zero weights: the empty pair list is the smallest, so nothing is matched
    z = np.zeros((2, 2, 1))
    assert brute_lex_max(z, real) == [-1, -1]
    for b in BACKENDS:
        assert list(solve_assignment(z, real, backend=b)) == [-1, -1]


def test_single_pair():
    w = np.ones((1, 1, 1))
    real = np.ones((1, 1), dtype=np.uint8)
    for b in BACKENDS:
        assert list(solve_assignment(w, real, backend=b)) == [0]


def test_composite_weight_order_and_arithmetic():
    a = CompositeWeight((1, 0), 0.0)
    b = CompositeWeight((0, 5), 100.0)
    assert a > b and b < a and a >= a and b <= a
    assert (a + b) == CompositeWeight((1, 5), 100.0)
    assert (a - a) == CompositeWeight.zero(2)
    with pytest.raises(ValueError):
        a < CompositeWeight((1,), 0.0)


def test_edge_weight_slots():
    assert edge_weight(PriorityKind.RANK_MAXIMAL, 3, 2, 0.5) == CompositeWeight((0, 1, 0), 0.5)
    assert edge_weight(PriorityKind.MAX_CARD_RANK_MAXIMAL, 3, 2, 0.0) == CompositeWeight((1, 0, 1, 0), 0.0)
    assert edge_weight(PriorityKind.FAIR, 3, 1, 0.0) == CompositeWeight((1, 0, 0, -1), 0.0)
    assert edge_weight(PriorityKind.PARETO, 3, 3, 0.2) == CompositeWeight((), 0.2)
    with pytest.raises(ValueError):
        edge_weight(PriorityKind.FAIR, 3, 4, 0.0)


def test_max_weight_matching_over_edge_list():
    edges = [(0, 0, CompositeWeight((), 1.0)), (0, 1, CompositeWeight((), 0.9)),
             (1, 0, CompositeWeight((), 0.6))]
    assert max_weight_matching(edges) == Matching(frozenset({(0, 1), (1, 0)}))
    assert max_weight_matching([]) == Matching(frozenset())
    with pytest.raises(ValueError):
        max_weight_matching([(0, 0, CompositeWeight((), -1.0))])
    with pytest.raises(ValueError):
        max_weight_matching(edges + [(0, 0, CompositeWeight((), 2.0))])


def test_one_rank_one_edge_beats_any_number_of_lower_ranks():
    # a1 ranks h1 first; a2..a4 rank h1 second and their own object nowhere else
    inst = strict_instance([[1], [2, 1], [3, 1], [4, 1]])
    m = engine.solve_priority(inst, PriorityKind.RANK_MAXIMAL, np.zeros((4, 4)))
    assert rank_counts(inst, m)[0] == 4


def test_example7_priority_classes():
    inst = example7()
    z = np.zeros((7, 7))
    rm = engine.solve_priority(inst, PriorityKind.RANK_MAXIMAL, z)
    mc = engine.solve_priority(inst, PriorityKind.MAX_CARD_RANK_MAXIMAL, z)
    fair = engine.solve_priority(inst, PriorityKind.FAIR, z)
    assert rank_counts(inst, rm) == (3, 1, 1, 1, 0, 0, 0)
    assert rank_counts(inst, mc) == (2, 3, 1, 1, 0, 0, 0)
    assert rank_counts(inst, fair) == (1, 5, 0, 1, 0, 0, 0)


def test_rank_bounded_cardinality():
    inst = example7()
    m = engine.max_cardinality_rank_bounded(inst, 1)
    assert m == matching_1based({1: 1, 2: 2, 4: 3})
    with pytest.raises(ValueError):
        engine.max_cardinality_rank_bounded(inst, 0)


def test_ttc_on_strict_orders_trades_cycles():
    inst = strict_instance([[2, 1], [1, 2]])
    assert engine.ttc(inst, matching_1based({1: 1, 2: 2})) == matching_1based({1: 2, 2: 1})


def test_ttc_keeps_own_object_when_tied_best():
    inst = Instance(2, (WeakOrder((frozenset({0, 1}),)), WeakOrder.strict([0, 1])))
    # a1 is indifferent, a2 wants h1; closure lets them swap without hurting a1
    out = engine.ttc(inst, Matching(frozenset({(0, 0), (1, 1)})))
    assert out == Matching(frozenset({(0, 1), (1, 0)}))


def test_pareto_closure_uses_free_objects():
    inst = strict_instance([[2, 1], [2]])
    m = engine.pareto_closure(inst, matching_1based({1: 1}))
    assert engine.is_pareto_optimal(inst, m)
    assert len(m) == 1
    assert not engine.is_pareto_optimal(inst, matching_1based({1: 1}))


def test_ttc_rejects_non_edges():
    inst = strict_instance([[1], [2]])
    with pytest.raises(ValueError):
        engine.ttc(inst, matching_1based({1: 2}))
