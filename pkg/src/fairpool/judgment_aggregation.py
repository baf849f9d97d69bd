"""Edge-wise judgment aggregation over expert causal diagrams.

Each expert's presence/absence of an edge is a binary judgment. Edges are
visited in order of their (undirected) distance from the predictor and admitted
into the pooled edge set when the aggregation rule accepts them and the pooled
graph stays acyclic.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from fairpool.causal_core import (
    PROB_TOL,
    CausalDiagram,
    Edge,
    ModelError,
    find_cycles,
    longest_path_length,
    reaches,
)


class AggregationError(ValueError):
    pass


class RuleKind(str, Enum):
    STRICT_MAJORITY = "strict-majority"
    QUOTA = "quota"
    UNANIMITY = "unanimity"
    WEIGHTED_MAJORITY = "weighted-majority"


class TieBreak(str, Enum):
    ALPHABETICAL = "alphabetical"
    RANDOM = "random"


@dataclass(frozen=True)
class AggregationRule:
    kind: RuleKind
    threshold: float | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if self.kind is RuleKind.QUOTA:
            if self.threshold is None or not 0 < self.threshold <= 1:
                raise AggregationError("quota threshold must lie in (0, 1]")
        if self.kind is RuleKind.WEIGHTED_MAJORITY:
            if not self.weights:
                raise AggregationError("weighted-majority needs weights")
            if any(w < 0 for w in self.weights):
                raise AggregationError("weights must be non-negative")
            if abs(math.fsum(self.weights) - 1) > PROB_TOL:
                raise AggregationError("weights must sum to 1")

    @classmethod
    def strict_majority(cls) -> AggregationRule:
        return cls(RuleKind.STRICT_MAJORITY)

    @classmethod
    def unanimity(cls) -> AggregationRule:
        return cls(RuleKind.UNANIMITY)

    @classmethod
    def quota(cls, threshold: float) -> AggregationRule:
        return cls(RuleKind.QUOTA, threshold=threshold)

    @classmethod
    def weighted_majority(cls, weights: Sequence[float]) -> AggregationRule:
        return cls(RuleKind.WEIGHTED_MAJORITY, weights=tuple(float(w) for w in weights))

    def describe(self) -> str:
        if self.kind is RuleKind.QUOTA:
            return f"quota({self.threshold:g})"
        if self.kind is RuleKind.WEIGHTED_MAJORITY:
            return "weighted-majority(" + ",".join(f"{w:g}" for w in self.weights) + ")"
        return self.kind.value


@dataclass(frozen=True)
class EdgeJudgmentProfile:
    edge: Edge
    votes: tuple[bool, ...]


def apply_rule(
    rule: AggregationRule,
    profile: EdgeJudgmentProfile | Sequence[bool],
    n_experts: int | None = None,
) -> bool:
    votes = profile.votes if isinstance(profile, EdgeJudgmentProfile) else tuple(profile)
    n = len(votes)
    if n == 0:
        raise AggregationError("no votes")
    if n_experts is not None and n != n_experts:
        raise AggregationError(f"expected {n_experts} votes, got {n}")
    yes = sum(bool(v) for v in votes)
    if rule.kind is RuleKind.STRICT_MAJORITY:
        return 2 * yes > n
    if rule.kind is RuleKind.UNANIMITY:
        return yes == n
    if rule.kind is RuleKind.QUOTA:
        # round() guards against 0.1 * 30 == 3.0000000000000004
        return yes >= math.ceil(round(rule.threshold * n, 9))
    if len(rule.weights) != n:
        raise AggregationError(f"expected {len(rule.weights)} votes, got {n}")
    score = math.fsum(w for w, v in zip(rule.weights, votes) if v)
    return score > 0.5 + PROB_TOL


@dataclass(frozen=True)
class EdgeLayering:
    """Edges of one expert grouped by distance from the predictor.

    ``layers[d - 1]`` holds the depth-d edges in (source, target) order and
    ``frontier[d]`` the vertices reached after depth d (``frontier[0]`` is the
    predictor alone). Edges never reached within ``max_depth`` are ``unlayered``.
    """

    predictor: str | None
    vertices: frozenset[str]
    layers: tuple[tuple[Edge, ...], ...]
    frontier: tuple[frozenset[str], ...]
    unlayered: tuple[Edge, ...]

    def depth_of(self, edge: Edge) -> int | None:
        for d, layer in enumerate(self.layers, start=1):
            if edge in layer:
                return d
        return None


def layer_edges(
    d: CausalDiagram, predictor: str | None, max_depth: int | None = None
) -> EdgeLayering:
    """Layer the edges of ``d`` by incidence distance from ``predictor``.

    ``max_depth`` defaults to the longest directed path of ``d``. A ``None``
    predictor leaves every edge unlayered.
    """
    if predictor is not None and predictor not in d.vertices:
        raise ModelError(f"unknown predictor: {predictor}")
    if max_depth is None:
        max_depth = longest_path_length(d)
    remaining = set(d.edges)
    seen = frozenset() if predictor is None else frozenset({predictor})
    frontier = [seen]
    layers: list[tuple[Edge, ...]] = []
    for _ in range(max_depth):
        layer = sorted(e for e in remaining if e[0] in seen or e[1] in seen)
        remaining.difference_update(layer)
        seen = seen | {v for e in layer for v in e}
        layers.append(tuple(layer))
        frontier.append(seen)
    return EdgeLayering(predictor, d.vertices, tuple(layers), tuple(frontier), tuple(sorted(remaining)))


@dataclass(frozen=True)
class AuditRecord:
    edge: Edge
    depth: int | None
    votes: tuple[bool, ...]
    rule_result: bool
    acyclic_ok: bool
    inserted: bool


def traversal_order(
    layerings: Sequence[EdgeLayering],
    tie_break: TieBreak | str = TieBreak.ALPHABETICAL,
    seed: int | None = None,
) -> list[tuple[Edge, int | None]]:
    """Depth-major visiting order; each edge appears once, at its minimal depth across experts."""
    tie_break = TieBreak(tie_break)
    rng = random.Random(seed) if tie_break is TieBreak.RANDOM else None
    depth_count = max((len(lay.layers) for lay in layerings), default=0)
    visited: set[Edge] = set()
    order: list[tuple[Edge, int | None]] = []

    def emit(edges: Iterable[Edge], depth: int | None) -> None:
        group = sorted(set(edges) - visited)
        if rng is not None:
            rng.shuffle(group)
        visited.update(group)
        order.extend((e, depth) for e in group)

    for depth in range(1, depth_count + 1):
        emit((e for lay in layerings if depth <= len(lay.layers) for e in lay.layers[depth - 1]), depth)
    emit((e for lay in layerings for e in lay.unlayered), None)
    return order


def pool_edges(
    layerings: Sequence[EdgeLayering],
    expert_edge_sets: Sequence[Iterable[Edge]],
    rule: AggregationRule,
    tie_break: TieBreak | str = TieBreak.ALPHABETICAL,
    seed: int | None = None,
    acyclicity_guard: bool = True,
) -> tuple[frozenset[Edge], tuple[AuditRecord, ...]]:
    """Aggregate expert edges into a pooled edge set, with an audit record per edge."""
    if not layerings:
        raise AggregationError("at least one expert is required")
    if len(layerings) != len(expert_edge_sets):
        raise AggregationError("one layering per expert edge set is required")
    first = layerings[0]
    for lay in layerings[1:]:
        if lay.vertices != first.vertices:
            raise AggregationError("inconsistent vertex universes across experts")
        if lay.predictor != first.predictor:
            raise AggregationError("inconsistent predictor across experts")
    edge_sets = [frozenset(es) for es in expert_edge_sets]
    n = len(edge_sets)

    pooled: set[Edge] = set()
    audit: list[AuditRecord] = []
    for edge, depth in traversal_order(layerings, tie_break, seed):
        votes = tuple(edge in es for es in edge_sets)
        rule_result = apply_rule(rule, votes, n)
        # adding s->t closes a cycle iff t already reaches s
        acyclic_ok = edge[0] != edge[1] and not reaches(pooled, edge[1], edge[0])
        inserted = rule_result and (acyclic_ok or not acyclicity_guard)
        if inserted:
            pooled.add(edge)
        audit.append(AuditRecord(edge, depth, votes, rule_result, acyclic_ok, inserted))
    return frozenset(pooled), tuple(audit)


# -- impossibility on the three-expert cyclic profile -------------------------

CYCLIC_PROFILE: tuple[frozenset[Edge], ...] = (
    frozenset({("A", "B"), ("B", "C")}),
    frozenset({("B", "C"), ("C", "A")}),
    frozenset({("C", "A"), ("A", "B")}),
)

PROPERTIES = ("universal-domain", "acyclicity", "unbiasedness", "non-dictatorship")


@dataclass(frozen=True)
class ConfigurationOutcome:
    name: str
    rule: str
    acyclicity_guard: bool
    tie_break: str
    pooled_edges: tuple[Edge, ...]
    violated: tuple[str, ...]
    notes: tuple[str, ...]


@dataclass(frozen=True)
class ImpossibilityReport:
    experts: tuple[tuple[Edge, ...], ...]
    outcomes: tuple[ConfigurationOutcome, ...]

    def outcome(self, name: str) -> ConfigurationOutcome:
        for o in self.outcomes:
            if o.name == name:
                return o
        raise KeyError(name)


def _pool_flat(experts, rule, guard, tie_break, seed=None):
    vertices = frozenset(v for es in experts for e in es for v in e)
    layerings = [layer_edges(CausalDiagram(vertices, es), None) for es in experts]
    return pool_edges(layerings, experts, rule, tie_break, seed, acyclicity_guard=guard)


def _dictator(rule: AggregationRule) -> int | None:
    if rule.kind is RuleKind.WEIGHTED_MAJORITY:
        for i, w in enumerate(rule.weights):
            if w > 0.5 + PROB_TOL:
                return i
    return None


def demonstrate_impossibility(
    experts: Sequence[Iterable[Edge]] = CYCLIC_PROFILE, seeds: Iterable[int] = range(32)
) -> ImpossibilityReport:
    """Run several rule configurations on a profile and list which of the four
    properties (universal domain, acyclicity, unbiasedness, non-dictatorship)
    each configuration violates there.

    Unbiasedness is judged violated when the rule is not self-dual on some edge
    profile (a bias towards presence or absence), or when some edge's fate
    differs from the rule's verdict on its own votes (it then depends on other
    edges or on the traversal order). The random tie-break is run for every seed
    in ``seeds`` to expose order dependence.
    """
    experts = tuple(frozenset(es) for es in experts)
    n = len(experts)
    vertices = sorted({v for es in experts for e in es for v in e})
    configs = [
        ("strict-majority/no-guard", AggregationRule.strict_majority(), False),
        ("strict-majority/guard", AggregationRule.strict_majority(), True),
        ("unanimity/guard", AggregationRule.unanimity(), True),
        ("dictator-1/guard", AggregationRule.weighted_majority([1.0] + [0.0] * (n - 1)), True),
    ]
    outcomes = []
    for name, rule, guard in configs:
        pooled, audit = _pool_flat(experts, rule, guard, TieBreak.ALPHABETICAL)
        variants = {}
        for seed in seeds:
            alt, _ = _pool_flat(experts, rule, guard, TieBreak.RANDOM, seed)
            variants.setdefault(alt, seed)
        violated: list[str] = []
        notes: list[str] = []

        cycles = find_cycles(vertices, pooled)
        if cycles:
            violated.append("acyclicity")
            notes.append("pooled graph contains cycle " + ",".join(cycles[0]))

        biased = [
            r.edge for r in audit
            if apply_rule(rule, r.votes) == apply_rule(rule, [not v for v in r.votes])
        ]
        overridden = [r.edge for r in audit if r.rule_result != r.inserted]
        if biased or overridden or len(variants) > 1:
            violated.append("unbiasedness")
        if biased:
            notes.append("rule is not self-dual on " + ", ".join(f"{s}->{t}" for s, t in biased))
        if overridden:
            notes.append(
                "rule verdict overridden by acyclicity guard on "
                + ", ".join(f"{s}->{t}" for s, t in overridden)
            )
        if len(variants) > 1:
            alt_seed = next((s for a, s in variants.items() if a != pooled), None)
            notes.append(
                f"{len(variants)} distinct outputs across random tie-break seeds"
                + (f" (seed {alt_seed} differs from alphabetical)" if alt_seed is not None else "")
            )

        dictator = _dictator(rule)
        if dictator is not None and pooled == experts[dictator]:
            violated.append("non-dictatorship")
            notes.append(f"output equals expert {dictator + 1}'s edge set")

        outcomes.append(
            ConfigurationOutcome(
                name=name,
                rule=rule.describe(),
                acyclicity_guard=guard,
                tie_break=TieBreak.ALPHABETICAL.value,
                pooled_edges=tuple(sorted(pooled)),
                violated=tuple(p for p in PROPERTIES if p in violated),
                notes=tuple(notes),
            )
        )
    return ImpossibilityReport(tuple(tuple(sorted(es)) for es in experts), tuple(outcomes))
