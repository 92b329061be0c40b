import numpy as np
import pytest

from threshmatch.generate import gen_random_instance, gen_random_valuations, random_case
from threshmatch.model import Instance, ValuationKind, WeakOrder, validate


def test_same_seed_same_instance():
    a = gen_random_instance(4, 6, 0.3, 0.5)
    b = gen_random_instance(4, 6, 0.3, 0.5)
    assert a == b
    assert a != gen_random_instance(5, 6, 0.3, 0.5)


def test_full_acceptance_without_ties_is_strict_and_complete():
    inst = gen_random_instance(1, 7)
    assert all(len(o.tiers) == 7 for o in inst.preferences)


@pytest.mark.parametrize("kind", list(ValuationKind))
def test_generated_profiles_validate(kind):
    for seed in range(30):
        inst, val = random_case(seed, 2 + seed % 6, kind, tie_prob=0.3, acceptability_prob=0.6)
        assert validate(inst, val) == []


def test_unit_range_impossible_for_single_tier():
    inst = Instance(2, (WeakOrder((frozenset({0, 1}),)), WeakOrder.strict([0, 1])))
    with pytest.raises(ValueError):
        gen_random_valuations(0, inst, ValuationKind.UNIT_RANGE)
    assert validate(inst, gen_random_valuations(0, inst, ValuationKind.UNIT_SUM)) == []


def test_bad_arguments():
    with pytest.raises(ValueError):
        gen_random_instance(0, 0)
    with pytest.raises(ValueError):
        gen_random_instance(0, 3, tie_prob=1.0)
    with pytest.raises(ValueError):
        gen_random_instance(0, 3, acceptability_prob=0.0)


def test_values_are_deterministic():
    inst = gen_random_instance(2, 5)
    a = gen_random_valuations(9, inst, ValuationKind.UNIT_SUM)
    b = gen_random_valuations(9, inst, ValuationKind.UNIT_SUM)
    assert np.array_equal(a.values, b.values)
