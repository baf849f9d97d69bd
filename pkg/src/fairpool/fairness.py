"""Counterfactual fairness of a predictor vertex.

Two independent routes: ``check_fair_bruteforce`` evaluates the definition on an
SCM by enumerating every context, and ``check_fair_lemma1`` applies the graphical
sufficient condition (the predictor reads nothing in A or its descendants).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, NamedTuple

from fairpool.causal_core import (
    PROB_TOL,
    CausalDiagram,
    ModelError,
    Probability,
    ScmModel,
    Value,
    contexts,
    descendants,
    evaluate,
    intervene,
)


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class FairnessPartition:
    """Predictor, protected attributes and features; together they cover the endogenous set."""

    predictor: str
    protected: frozenset[str]
    features: frozenset[str]

    def __post_init__(self) -> None:
        if not self.protected:
            raise PartitionError("protected set must be non-empty")
        if self.predictor in self.protected:
            raise PartitionError(f"predictor {self.predictor} cannot be protected")
        if self.predictor in self.features:
            raise PartitionError(f"predictor {self.predictor} cannot be a feature")
        overlap = self.protected & self.features
        if overlap:
            raise PartitionError(f"protected and features overlap: {', '.join(sorted(overlap))}")

    @classmethod
    def from_protected(
        cls, endogenous: Iterable[str], predictor: str, protected: Iterable[str]
    ) -> FairnessPartition:
        endogenous = frozenset(endogenous)
        protected = frozenset(protected)
        missing = sorted((protected | {predictor}) - endogenous)
        if missing:
            raise PartitionError(f"unknown variable: {', '.join(missing)}")
        return cls(predictor, protected, endogenous - protected - {predictor})

    @property
    def endogenous(self) -> frozenset[str]:
        return self.protected | self.features | {self.predictor}

    def check_against(self, endogenous: Iterable[str]) -> None:
        endogenous = frozenset(endogenous)
        if endogenous != self.endogenous:
            extra = sorted(self.endogenous - endogenous)
            missing = sorted(endogenous - self.endogenous)
            parts = []
            if extra:
                parts.append(f"not in model: {', '.join(extra)}")
            if missing:
                parts.append(f"not covered by partition: {', '.join(missing)}")
            raise PartitionError("partition does not match model (" + "; ".join(parts) + ")")


@dataclass(frozen=True)
class Witness:
    context: Mapping[str, Value] = field(hash=False)
    observed_protected: Mapping[str, Value] = field(hash=False)
    observed_features: Mapping[str, Value] = field(hash=False)
    counterfactual_protected: Mapping[str, Value] = field(hash=False)
    factual_distribution: Mapping[Value, Probability] = field(hash=False)
    counterfactual_distribution: Mapping[Value, Probability] = field(hash=False)


@dataclass(frozen=True)
class FairnessVerdict:
    witnesses: tuple[Witness, ...] = ()

    @property
    def fair(self) -> bool:
        return not self.witnesses


class Lemma1Result(NamedTuple):
    holds: bool
    offenders: frozenset[str]


def check_fair_lemma1(d: CausalDiagram, p: FairnessPartition) -> Lemma1Result:
    """Graphical check: no parent of the predictor lies in A or de(A)."""
    unknown = sorted((p.protected | {p.predictor}) - d.vertices)
    if unknown:
        raise ModelError(f"unknown vertex: {', '.join(unknown)}")
    tainted = p.protected | descendants(d, p.protected)
    offenders = frozenset(d.parents(p.predictor)) & tainted
    return Lemma1Result(not offenders, offenders)


def _distributions_equal(
    a: Mapping[Value, Probability], b: Mapping[Value, Probability], tol: float
) -> bool:
    for y in set(a) | set(b):
        if abs(a.get(y, 0) - b.get(y, 0)) > tol:
            return False
    return True


def context_posterior(
    m: ScmModel, evidence: Mapping[str, Value]
) -> dict[tuple[Value, ...], Probability]:
    """P(u | evidence) over contexts keyed by values in ``m.exogenous_order``.

    Returns an empty mapping when the evidence has probability zero.
    """
    weights: dict[tuple[Value, ...], Probability] = {}
    total: Probability = Fraction(0)
    for ctx, prob in contexts(m):
        values = evaluate(m, ctx)
        if all(values[k] == v for k, v in evidence.items()):
            weights[tuple(ctx[u] for u in m.exogenous_order)] = prob
            total += prob
    if total == 0:
        return {}
    return {k: w / total for k, w in weights.items()}


def check_fair_bruteforce(
    m: ScmModel, p: FairnessPartition, tol: float = PROB_TOL
) -> FairnessVerdict:
    """Exact counterfactual fairness by enumeration.

    For every evidence pair (A=a, X=x) of positive probability and every joint
    alternative a', the distribution of the predictor under do(A=a) and do(A=a')
    is computed over the context posterior P(u | A=a, X=x). Any mismatch larger
    than ``tol`` yields a witness.
    """
    p.check_against(m.endogenous)
    protected = sorted(p.protected)
    features = sorted(p.features)
    alternatives = list(itertools.product(*(m.domains[a] for a in protected)))
    intervened = [intervene(m, dict(zip(protected, alt))) for alt in alternatives]

    # evidence key -> [mass, predictor distribution per alternative, (context, outcomes) members]
    groups: dict[tuple, list[Any]] = {}
    for ctx, prob in contexts(m):
        factual = evaluate(m, ctx)
        key = (
            tuple(factual[a] for a in protected),
            tuple(factual[x] for x in features),
        )
        outcomes = [evaluate(model, ctx)[p.predictor] for model in intervened]
        entry = groups.get(key)
        if entry is None:
            entry = groups[key] = [Fraction(0), [dict() for _ in alternatives], []]
        entry[0] += prob
        for dist, y in zip(entry[1], outcomes):
            dist[y] = dist.get(y, 0) + prob
        entry[2].append((ctx, outcomes))

    witnesses: list[Witness] = []
    for (a_obs, x_obs), (mass, dists, members) in groups.items():
        if mass <= 0:
            continue
        ref = alternatives.index(a_obs)
        factual_dist = {y: w / mass for y, w in dists[ref].items()}
        for k, alt in enumerate(alternatives):
            if k == ref:
                continue
            cf_dist = {y: w / mass for y, w in dists[k].items()}
            if _distributions_equal(factual_dist, cf_dist, tol):
                continue
            ctx = next(c for c, outs in members if outs[ref] != outs[k])
            witnesses.append(
                Witness(
                    context=dict(ctx),
                    observed_protected=dict(zip(protected, a_obs)),
                    observed_features=dict(zip(features, x_obs)),
                    counterfactual_protected=dict(zip(protected, alt)),
                    factual_distribution=factual_dist,
                    counterfactual_distribution=cf_dist,
                )
            )
    return FairnessVerdict(tuple(witnesses))
