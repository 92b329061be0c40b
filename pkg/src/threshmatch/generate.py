"""Seeded random instances and valuation profiles."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import Instance, ValuationKind, ValuationProfile, WeakOrder


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_random_instance(seed, n: int, tie_prob: float = 0.0, acceptability_prob: float = 1.0) -> Instance:
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= tie_prob < 1 or not 0 < acceptability_prob <= 1:
        raise ValueError("invalid probabilities")
    rng = _rng(seed)
    prefs = []
    for _ in range(n):
        acc = np.flatnonzero(rng.random(n) < acceptability_prob)
        while acc.size == 0:
            acc = np.flatnonzero(rng.random(n) < acceptability_prob)
        perm = [int(o) for o in rng.permutation(acc)]
        tiers = [[perm[0]]]
        for o in perm[1:]:
            if rng.random() < tie_prob:
                tiers[-1].append(o)
            else:
                tiers.append([o])
        prefs.append(WeakOrder(tuple(frozenset(t) for t in tiers)))
    return Instance(n, tuple(prefs))


def _tiered_sample(rng: np.random.Generator, order: WeakOrder) -> dict[int, float]:
    """Sorted exponential draws laid onto the order, tied objects sharing the tier mean."""
    objs = order.ordered()
    draws = np.sort(rng.exponential(size=len(objs)))[::-1]
    out: dict[int, float] = {}
    pos = 0
    for tier in order.tiers:
        mean = float(draws[pos:pos + len(tier)].mean())
        for o in tier:
            out[o] = mean
        pos += len(tier)
    return out


def gen_random_valuations(seed, instance: Instance, kind: ValuationKind) -> ValuationProfile:
    rng = _rng(seed)
    n = instance.n
    values = np.zeros((n, n))
    for a, order in enumerate(instance.preferences):
        raw = _tiered_sample(rng, order)
        objs = list(raw)
        vals = np.array([raw[o] for o in objs])
        if kind is ValuationKind.UNIT_SUM:
            vals = vals / vals.sum()
        else:
            if len(order.tiers) < 2:
                raise ValueError(f"agent {a + 1} has no strictly preferred pair; unit-range impossible")
            lo, hi = vals.min(), vals.max()
            vals = (vals - lo) / (hi - lo)
        values[a, objs] = vals
    return ValuationProfile(kind, values)


def random_case(seed: int | Sequence[int], n: int, kind: ValuationKind, tie_prob: float = 0.2,
                acceptability_prob: float = 0.8, max_attempts: int = 1000):
    """Instance plus valuations; redraws the instance when unit-range is impossible."""
    base = [seed] if isinstance(seed, int) else list(seed)
    for attempt in range(max_attempts):
        instance = gen_random_instance(base + [attempt, 0], n, tie_prob, acceptability_prob)
        try:
            return instance, gen_random_valuations(base + [attempt, 1], instance, kind)
        except ValueError:
            continue
    raise RuntimeError("could not draw a valid instance")
