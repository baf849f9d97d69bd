"""Fair aggregation of expert causal diagrams.

``removal_pooling`` deletes protected attributes and everything any expert
places downstream of them, then pools the surviving edges. ``pooling_removal``
pools first and deletes protected attributes with their descendants in the
pooled graph afterwards. Both outputs satisfy the graphical fairness condition
by construction; the report carries the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from fairpool.causal_core import (
    CausalDiagram,
    Edge,
    ModelError,
    descendants,
    longest_path_length,
    reaches,
    validate_diagram,
)
from fairpool.fairness import FairnessPartition, PartitionError, check_fair_lemma1
from fairpool.judgment_aggregation import (
    AggregationRule,
    AuditRecord,
    TieBreak,
    layer_edges,
    pool_edges,
)


class Algorithm(str, Enum):
    REMOVAL_POOLING = "removal-pooling"
    POOLING_REMOVAL = "pooling-removal"


@dataclass(frozen=True)
class PoolingReport:
    algorithm: Algorithm
    partition: FairnessPartition
    pooled_diagram: CausalDiagram
    predictor_inputs: frozenset[str]
    removed_vertices: frozenset[str]
    audit_trail: tuple[AuditRecord, ...]
    fairness_certificate: bool
    # pooling-removal: pooled graph before removal; removal-pooling: union-reduced expert graphs
    intermediate: tuple[CausalDiagram, ...]
    # per expert, the vertices that expert alone would remove (removal-pooling only)
    expert_removed: tuple[frozenset[str], ...] = ()

    @property
    def empty(self) -> bool:
        return not self.pooled_diagram.edges


def _prepare(
    experts: Sequence[CausalDiagram], p: FairnessPartition
) -> list[CausalDiagram]:
    if not experts:
        raise ModelError("at least one expert diagram is required")
    diagrams = [d.without_exogenous() for d in experts]
    vertices = diagrams[0].vertices
    for i, d in enumerate(diagrams):
        if d.vertices != vertices:
            raise ModelError(f"vertex-set mismatch between expert 1 and expert {i + 1}")
        problems = validate_diagram(d)
        if problems:
            raise ModelError([f"expert {i + 1}: {msg}" for msg in problems])
    if p.predictor in p.protected:
        raise PartitionError("predictor cannot be protected")
    p.check_against(vertices)
    return diagrams


def tainted_vertices(d: CausalDiagram, p: FairnessPartition) -> frozenset[str]:
    """A together with its descendants in ``d``, never including the predictor."""
    return (p.protected | descendants(d, p.protected)) - {p.predictor}


def fair_submodel(d: CausalDiagram, p: FairnessPartition) -> CausalDiagram:
    """The part of one expert's diagram that this expert alone leaves untainted."""
    d = d.without_exogenous()
    return d.subgraph(d.vertices - tainted_vertices(d, p))


def _pool(
    diagrams: Sequence[CausalDiagram],
    predictor: str,
    rule: AggregationRule,
    tie_break: TieBreak | str,
    seed: int | None,
) -> tuple[frozenset[Edge], tuple[AuditRecord, ...]]:
    depth = max(longest_path_length(d) for d in diagrams)
    layerings = [layer_edges(d, predictor, depth) for d in diagrams]
    return pool_edges(layerings, [d.edges for d in diagrams], rule, tie_break, seed)


def _certify(pooled: CausalDiagram, removed: frozenset[str], p: FairnessPartition) -> bool:
    # removed vertices return as isolated vertices so that A is known to the check
    return check_fair_lemma1(pooled.with_vertices(removed), p).holds


def removal_pooling(
    experts: Sequence[CausalDiagram],
    p: FairnessPartition,
    rule: AggregationRule,
    tie_break: TieBreak | str = TieBreak.ALPHABETICAL,
    seed: int | None = None,
) -> PoolingReport:
    diagrams = _prepare(experts, p)
    per_expert = tuple(tainted_vertices(d, p) for d in diagrams)
    removed = frozenset().union(*per_expert)
    fair_vertices = diagrams[0].vertices - removed
    reduced = tuple(d.subgraph(fair_vertices) for d in diagrams)
    edges, audit = _pool(reduced, p.predictor, rule, tie_break, seed)
    pooled = CausalDiagram(fair_vertices, edges)
    return PoolingReport(
        algorithm=Algorithm.REMOVAL_POOLING,
        partition=p,
        pooled_diagram=pooled,
        predictor_inputs=frozenset(pooled.parents(p.predictor)),
        removed_vertices=removed,
        audit_trail=audit,
        fairness_certificate=_certify(pooled, removed, p),
        intermediate=reduced,
        expert_removed=per_expert,
    )


def pooling_removal(
    experts: Sequence[CausalDiagram],
    p: FairnessPartition,
    rule: AggregationRule,
    tie_break: TieBreak | str = TieBreak.ALPHABETICAL,
    seed: int | None = None,
) -> PoolingReport:
    diagrams = _prepare(experts, p)
    edges, audit = _pool(diagrams, p.predictor, rule, tie_break, seed)
    merged = CausalDiagram(diagrams[0].vertices, edges)
    removed = tainted_vertices(merged, p)
    pooled = merged.subgraph(merged.vertices - removed)
    return PoolingReport(
        algorithm=Algorithm.POOLING_REMOVAL,
        partition=p,
        pooled_diagram=pooled,
        predictor_inputs=frozenset(pooled.parents(p.predictor)),
        removed_vertices=removed,
        audit_trail=audit,
        fairness_certificate=_certify(pooled, removed, p),
        intermediate=(merged,),
    )


def run_algorithm(
    algorithm: Algorithm | str,
    experts: Sequence[CausalDiagram],
    p: FairnessPartition,
    rule: AggregationRule,
    tie_break: TieBreak | str = TieBreak.ALPHABETICAL,
    seed: int | None = None,
) -> PoolingReport:
    if Algorithm(algorithm) is Algorithm.REMOVAL_POOLING:
        return removal_pooling(experts, p, rule, tie_break, seed)
    return pooling_removal(experts, p, rule, tie_break, seed)


@dataclass(frozen=True)
class Comparison:
    removal_pooling: PoolingReport
    pooling_removal: PoolingReport

    @property
    def predictor_inputs(self) -> tuple[frozenset[str], frozenset[str]]:
        return self.removal_pooling.predictor_inputs, self.pooling_removal.predictor_inputs

    @property
    def removed(self) -> tuple[frozenset[str], frozenset[str]]:
        return self.removal_pooling.removed_vertices, self.pooling_removal.removed_vertices

    @property
    def removal_pooling_empty(self) -> bool:
        return self.removal_pooling.empty


def compare_algorithms(
    experts: Sequence[CausalDiagram],
    p: FairnessPartition,
    rule: AggregationRule,
    tie_break: TieBreak | str = TieBreak.ALPHABETICAL,
    seed: int | None = None,
) -> Comparison:
    return Comparison(
        removal_pooling(experts, p, rule, tie_break, seed),
        pooling_removal(experts, p, rule, tie_break, seed),
    )


def reattach_removed(report: PoolingReport, experts: Sequence[CausalDiagram]) -> CausalDiagram:
    """Full-vertex diagram that embeds the pooled output in a plausible world.

    Removed vertices come back together with the expert edges that point *into*
    them (from anywhere), inserted in lexicographic order while they keep the
    graph acyclic. No edge leaves a removed vertex, so the protected attributes'
    descendants stay among the removed vertices, while A may still share causes
    with the surviving features.
    """
    edges = set(report.pooled_diagram.edges)
    candidates = sorted(
        {
            e
            for d in experts
            for e in d.without_exogenous().edges
            if e[1] in report.removed_vertices
        }
    )
    for s, t in candidates:
        if not reaches(edges, t, s):
            edges.add((s, t))
    vertices = report.pooled_diagram.vertices | report.removed_vertices
    return CausalDiagram(vertices, frozenset(edges))
