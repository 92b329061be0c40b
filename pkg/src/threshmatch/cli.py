"""Experiment harness: run algorithm suites, the adversary, or oracle cross-checks to CSV."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field

from . import oracle
from .adversary import run_adversary
from .algorithms import (AlgoResult, adaptive_approx, nonadaptive_po_unit_sum, nonadaptive_priority_unit_sum,
                         nonadaptive_unit_range, ordinal_baseline, welfare_optimal_priority)
from .elicitation import ThresholdOracle
from .generate import random_case
from .model import PRIORITY_KINDS, Instance, PriorityKind, ValuationKind, ValuationProfile, welfare

ORACLE_MAX_N = 8
RATIO_TOL = 1e-9

SUITE_COLUMNS = ["n", "trial", "algorithm", "kind", "valuation_kind", "epsilon", "c", "welfare",
                 "opt_welfare", "ratio", "max_queries_per_agent", "total_queries", "millis"]
ADVERSARY_COLUMNS = ["n", "algorithm", "kind", "valuation_kind", "n1", "n2", "n3", "n4", "Z",
                     "sw_alg", "sw_opt", "ratio", "sqrt_n_over_28", "opt_lower_bound", "alg_upper_bound",
                     "opt_above_sqrt_bound", "indistinguishable", "millis"]
ORACLE_COLUMNS = ["n", "trial", "kind", "valuation_kind", "check", "ok"]

ALGORITHMS = ("full_information", "adaptive", "nonadaptive_unit_sum", "nonadaptive_po_unit_sum",
              "nonadaptive_unit_range", "ordinal_baseline")


@dataclass
class ExperimentConfig:
    seed: int = 0
    sizes: list[int] = field(default_factory=lambda: [4, 5, 6])
    trials: int = 5
    valuation_kind: ValuationKind = ValuationKind.UNIT_SUM
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    kinds: list[PriorityKind] = field(default_factory=lambda: list(PriorityKind))
    epsilons: list[float] = field(default_factory=lambda: [0.5, 1.0])
    tie_prob: float = 0.2
    acceptability_prob: float = 0.8
    adversary_sizes: list[int] = field(default_factory=lambda: [20, 45, 80])
    adversary_algorithm: str = "nonadaptive_unit_sum"
    out: str | None = None

    def __post_init__(self):
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("sizes must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(e <= 0 for e in self.epsilons):
            raise ValueError("epsilons must be positive")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "valuation_kind" in data:
            data["valuation_kind"] = ValuationKind(data["valuation_kind"])
        if "kinds" in data:
            data["kinds"] = [PriorityKind(k) for k in data["kinds"]]
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)


def _applicable(name: str, kind: PriorityKind, vkind: ValuationKind, n: int) -> bool:
    if name == "nonadaptive_unit_sum":
        return vkind is ValuationKind.UNIT_SUM and kind.is_priority
    if name == "nonadaptive_po_unit_sum":
        return vkind is ValuationKind.UNIT_SUM and kind is PriorityKind.PARETO and n >= 8
    if name == "nonadaptive_unit_range":
        return vkind is ValuationKind.UNIT_RANGE
    return True


def run_algorithm(name: str, instance: Instance, kind: PriorityKind, valuations: ValuationProfile,
                  epsilon: float | None = None) -> AlgoResult:
    handle = ThresholdOracle(valuations)
    if name == "full_information":
        return welfare_optimal_priority(instance, kind, valuations)
    if name == "adaptive":
        return adaptive_approx(instance, kind, epsilon, handle)
    if name == "nonadaptive_unit_sum":
        return nonadaptive_priority_unit_sum(instance, kind, handle)
    if name == "nonadaptive_po_unit_sum":
        return nonadaptive_po_unit_sum(instance, handle)
    if name == "nonadaptive_unit_range":
        return nonadaptive_unit_range(instance, kind, handle)
    if name == "ordinal_baseline":
        return ordinal_baseline(instance, kind)
    raise ValueError(f"unknown algorithm {name}")


def _optimum(instance: Instance, kind: PriorityKind, valuations: ValuationProfile) -> float:
    if instance.n <= ORACLE_MAX_N:
        return oracle.optimal_within_class(instance, valuations, kind).best_welfare
    return welfare(welfare_optimal_priority(instance, kind, valuations).matching, valuations)


def run_suite(config: ExperimentConfig) -> tuple[list[dict], list[str]]:
    """Rows of the suite report plus a list of invariant failures."""
    rows, failures = [], []
    for n in config.sizes:
        for trial in range(config.trials):
            instance, valuations = random_case([config.seed, n, trial], n, config.valuation_kind,
                                               config.tie_prob, config.acceptability_prob)
            for kind in config.kinds:
                opt = _optimum(instance, kind, valuations)
                for name in config.algorithms:
                    if not _applicable(name, kind, config.valuation_kind, n):
                        continue
                    for eps in (config.epsilons if name == "adaptive" else [None]):
                        start = time.perf_counter()
                        result = run_algorithm(name, instance, kind, valuations, eps)
                        millis = (time.perf_counter() - start) * 1000
                        got = welfare(result.matching, valuations)
                        if n <= ORACLE_MAX_N and not oracle.in_class(instance, result.matching, kind):
                            failures.append(f"n={n} trial={trial} {name} {kind.value}: outside class")
                        ratio = 1.0 if got == opt == 0 else (opt / got if got > 0 else math.inf)
                        if ratio < 1 - RATIO_TOL:
                            failures.append(f"n={n} trial={trial} {name} {kind.value}: ratio {ratio} < 1")
                        counts = result.queries_per_agent(n)
                        rows.append({
                            "n": n, "trial": trial, "algorithm": name, "kind": kind.value,
                            "valuation_kind": config.valuation_kind.value,
                            "epsilon": "" if eps is None else eps,
                            "c": result.info.get("c", ""),
                            "welfare": repr(got), "opt_welfare": repr(opt), "ratio": repr(ratio),
                            "max_queries_per_agent": max(counts), "total_queries": sum(counts),
                            "millis": f"{millis:.3f}",
                        })
    return rows, failures


def _adversary_algorithm(name: str, kind: PriorityKind):
    if name == "nonadaptive_unit_sum":
        return lambda inst, handle: nonadaptive_priority_unit_sum(inst, kind, handle)
    if name == "nonadaptive_po_unit_sum":
        return lambda inst, handle: nonadaptive_po_unit_sum(inst, handle)
    if name == "nonadaptive_unit_range":
        return lambda inst, handle: nonadaptive_unit_range(inst, kind, handle)
    raise ValueError(f"{name} is not a one-query-per-pair algorithm")


def run_adversary_suite(config: ExperimentConfig) -> tuple[list[dict], list[str]]:
    rows, failures = [], []
    for kind in config.kinds:
        name = config.adversary_algorithm
        if name == "nonadaptive_unit_sum" and not kind.is_priority:
            continue
        if name == "nonadaptive_po_unit_sum" and kind is not PriorityKind.PARETO:
            continue
        algo = _adversary_algorithm(name, kind)
        for n in config.adversary_sizes:
            rep = run_adversary(algo, n, kind, config.valuation_kind)
            row = rep.row()
            row.update({"algorithm": name, "millis": f"{rep.seconds * 1000:.3f}"})
            rows.append(row)
            if not rep.indistinguishable:
                failures.append(f"n={n} {kind.value}: replay differs")
            if not rep.opt_above_sqrt_bound:
                failures.append(f"n={n} {kind.value}: optimum below sqrt(n)/28")
    return rows, failures


def run_oracle_checks(config: ExperimentConfig) -> tuple[list[dict], list[str]]:
    rows, failures = [], []
    for n in config.sizes:
        if n > oracle.BIGINT_MAX_N:
            continue
        for trial in range(config.trials):
            instance, valuations = random_case([config.seed, n, trial], n, config.valuation_kind,
                                               config.tie_prob, config.acceptability_prob)
            for kind in PRIORITY_KINDS:
                checks = {
                    "bigint_agrees": oracle.bigint_priority_check(instance, kind, valuations),
                    "priority_argmax_is_class": oracle.priority_argmax_equals_class(instance, kind),
                    "full_information_optimal": abs(
                        welfare(welfare_optimal_priority(instance, kind, valuations).matching, valuations)
                        - oracle.optimal_within_class(instance, valuations, kind).best_welfare) <= 1e-9,
                }
                for check, ok in checks.items():
                    rows.append({"n": n, "trial": trial, "kind": kind.value,
                                 "valuation_kind": config.valuation_kind.value, "check": check, "ok": ok})
                    if not ok:
                        failures.append(f"n={n} trial={trial} {kind.value}: {check} failed")
    return rows, failures


def write_csv(rows: list[dict], columns: list[str], path: str | None) -> None:
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path:
            out.close()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="threshmatch", description=__doc__)
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--mode", choices=["suite", "adversary", "oracle-check"], default="suite")
    parser.add_argument("--out", help="CSV output path (default: stdout)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    args = parser.parse_args(argv)

    try:
        data = {}
        if args.config:
            with open(args.config) as fh:
                data = json.load(fh)
        config = ExperimentConfig.from_dict(data)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.seed = args.seed
    out = args.out or config.out

    if args.mode == "suite":
        rows, failures = run_suite(config)
        columns = SUITE_COLUMNS
    elif args.mode == "adversary":
        rows, failures = run_adversary_suite(config)
        columns = ADVERSARY_COLUMNS
    else:
        rows, failures = run_oracle_checks(config)
        columns = ORACLE_COLUMNS
    write_csv(rows, columns, out)
    for msg in failures:
        print(f"invariant failure: {msg}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
