"""Monte-Carlo comparison of the two pooling algorithms on random ensembles."""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass

from fairpool.fair_pooling import Algorithm, compare_algorithms
from fairpool.judgment_aggregation import AggregationRule
from fairpool.random_models import random_ensemble

CSV_HEADER = ("trial", "algorithm", "edges", "predictor_inputs", "empty")


@dataclass(frozen=True)
class TrialResult:
    trial: int
    algorithm: Algorithm
    edges: int
    predictor_inputs: int

    @property
    def empty(self) -> bool:
        return self.edges == 0


def trial_seeds(seed: int, trials: int) -> list[int]:
    """Independent per-trial seeds drawn from the master seed."""
    master = random.Random(seed)
    return [master.getrandbits(63) for _ in range(trials)]


def run_trial(
    trial: int,
    trial_seed: int,
    n_experts: int,
    n_vars: int,
    edge_prob: float,
    rule: AggregationRule,
) -> list[TrialResult]:
    rng = random.Random(trial_seed)
    ensemble = random_ensemble(n_experts, n_vars, edge_prob, rng)
    cmp = compare_algorithms(ensemble.experts, ensemble.partition, rule)
    return [
        TrialResult(trial, r.algorithm, len(r.pooled_diagram.edges), len(r.predictor_inputs))
        for r in (cmp.removal_pooling, cmp.pooling_removal)
    ]


def run_bench(
    n_experts: int,
    n_vars: int,
    edge_prob: float,
    trials: int,
    seed: int,
    rule: AggregationRule | None = None,
) -> list[TrialResult]:
    if n_experts < 1 or n_vars < 2 or trials < 0:
        raise ValueError("experts >= 1, vars >= 2 and trials >= 0 are required")
    if not 0 <= edge_prob <= 1:
        raise ValueError("edge probability must lie in [0, 1]")
    rule = rule or AggregationRule.strict_majority()
    results: list[TrialResult] = []
    for trial, s in enumerate(trial_seeds(seed, trials)):
        results.extend(run_trial(trial, s, n_experts, n_vars, edge_prob, rule))
    return results


def empty_rates(results: list[TrialResult]) -> dict[Algorithm, float]:
    rates = {}
    for alg in Algorithm:
        rows = [r for r in results if r.algorithm is alg]
        if rows:
            rates[alg] = sum(r.empty for r in rows) / len(rows)
    return rates


def to_csv(results: list[TrialResult]) -> str:
    """Per-trial rows, then one ``summary`` row per algorithm holding the mean edge
    count, mean number of predictor inputs and the empty-edge-set rate."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow([r.trial, r.algorithm.value, r.edges, r.predictor_inputs, int(r.empty)])
    for alg in Algorithm:
        rows = [r for r in results if r.algorithm is alg]
        if not rows:
            continue
        n = len(rows)
        writer.writerow(
            [
                "summary",
                alg.value,
                f"{sum(r.edges for r in rows) / n:.6f}",
                f"{sum(r.predictor_inputs for r in rows) / n:.6f}",
                f"{sum(r.empty for r in rows) / n:.6f}",
            ]
        )
    return buf.getvalue()
