"""Seeded generators for random expert ensembles and SCMs over a given diagram."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from fairpool.causal_core import CausalDiagram, ScmModel, StructuralEquation
from fairpool.fairness import FairnessPartition
from fairpool.judgment_aggregation import AggregationRule

PREDICTOR = "Y"


def variable_names(n_vars: int) -> list[str]:
    """``n_vars - 1`` feature names plus the predictor ``Y``."""
    if n_vars < 2:
        raise ValueError("need at least two variables (one protected, one predictor)")
    return [f"V{i}" for i in range(n_vars - 1)] + [PREDICTOR]


def random_dag(
    vertices: Sequence[str],
    edge_prob: float,
    rng: random.Random,
    sink: str | None = None,
) -> CausalDiagram:
    """Random DAG: shuffle a causal order, then draw each forward pair with ``edge_prob``.

    ``sink``, when given, is placed last in the order so it has no children.
    """
    order = [v for v in vertices if v != sink]
    rng.shuffle(order)
    if sink is not None:
        order.append(sink)
    edges = [
        (order[i], order[j])
        for i, j in itertools.combinations(range(len(order)), 2)
        if rng.random() < edge_prob
    ]
    return CausalDiagram.from_edges(edges, vertices)


@dataclass(frozen=True)
class Ensemble:
    experts: tuple[CausalDiagram, ...]
    partition: FairnessPartition


def random_ensemble(
    n_experts: int,
    n_vars: int,
    edge_prob: float,
    rng: random.Random,
    n_protected: int = 1,
    predictor_sink: bool = True,
) -> Ensemble:
    names = variable_names(n_vars)
    experts = tuple(
        random_dag(names, edge_prob, rng, PREDICTOR if predictor_sink else None)
        for _ in range(n_experts)
    )
    protected = names[: min(n_protected, n_vars - 1)]
    return Ensemble(experts, FairnessPartition.from_protected(names, PREDICTOR, protected))


def random_rule(n_experts: int, rng: random.Random) -> AggregationRule:
    kind = rng.choice(["strict-majority", "unanimity", "quota", "weighted-majority"])
    if kind == "strict-majority":
        return AggregationRule.strict_majority()
    if kind == "unanimity":
        return AggregationRule.unanimity()
    if kind == "quota":
        return AggregationRule.quota(rng.choice([0.25, 1 / 3, 0.5, 2 / 3, 1.0]))
    raw = [rng.randint(0, 4) for _ in range(n_experts)]
    if not any(raw):
        raw[0] = 1
    total = sum(raw)
    return AggregationRule.weighted_majority([r / total for r in raw])


def random_probability_vector(size: int, rng: random.Random, denominator: int = 8) -> tuple[Fraction, ...]:
    """Exact random probability vector; entries may be zero."""
    cuts = sorted(rng.randint(0, denominator) for _ in range(size - 1))
    bounds = [0, *cuts, denominator]
    return tuple(Fraction(bounds[k + 1] - bounds[k], denominator) for k in range(size))


def random_scm(
    diagram: CausalDiagram,
    rng: random.Random,
    domain: Sequence = (0, 1),
    noise_prefix: str = "U_",
) -> ScmModel:
    """Attach one binary noise root per endogenous vertex and random lookup tables."""
    endogenous = sorted(diagram.without_exogenous().vertices)
    roots = {v: f"{noise_prefix}{v}" for v in endogenous}
    clash = set(roots.values()) & diagram.vertices
    if clash:
        raise ValueError(f"noise root names clash with vertices: {sorted(clash)}")
    edges = set(diagram.without_exogenous().edges) | {(u, v) for v, u in roots.items()}
    full = CausalDiagram.from_edges(edges, endogenous, exogenous=roots.values())
    domains = {v: tuple(domain) for v in full.vertices}
    equations = {}
    for v in endogenous:
        parents = full.parents(v)
        table = {
            key: rng.choice(domain)
            for key in itertools.product(*(domains[p] for p in parents))
        }
        equations[v] = StructuralEquation(v, parents, table)
    dists = {u: random_probability_vector(len(domain), rng) for u in roots.values()}
    return ScmModel(full, domains, equations, dists)
