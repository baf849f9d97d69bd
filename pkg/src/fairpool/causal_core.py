"""Causal diagrams and finite-domain structural causal models.

Diagrams are plain immutable values: a vertex set, an edge set and the subset of
vertices that are exogenous. Structural equations are explicit lookup tables so
that every query (evaluation, intervention, observational distribution) is an
exact enumeration over contexts.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping, Sequence

Edge = tuple[str, str]
Value = Any
Probability = Fraction | float

PROB_TOL = 1e-9


class ModelError(ValueError):
    """Raised when a diagram, model or intervention violates its invariants."""

    def __init__(self, violations: Sequence[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def as_probability(value: Any) -> Probability:
    """Coerce an input probability to an exact rational where the input permits.

    Integers, fractions and ``"p/q"`` strings are exact. Floats are read through
    their shortest decimal representation, so ``0.3`` becomes ``3/10``.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(repr(value))
    raise TypeError(f"cannot interpret {value!r} as a probability")


@dataclass(frozen=True)
class CausalDiagram:
    vertices: frozenset[str]
    edges: frozenset[Edge]
    exogenous: frozenset[str] = frozenset()

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Edge],
        vertices: Iterable[str] = (),
        exogenous: Iterable[str] = (),
    ) -> CausalDiagram:
        """Build a diagram; endpoints of edges are added to the vertex set."""
        edge_set = frozenset((str(s), str(t)) for s, t in edges)
        verts = set(vertices) | set(exogenous)
        for s, t in edge_set:
            verts.add(s)
            verts.add(t)
        return cls(frozenset(verts), edge_set, frozenset(exogenous))

    @property
    def endogenous(self) -> frozenset[str]:
        return self.vertices - self.exogenous

    def sorted_vertices(self) -> list[str]:
        return sorted(self.vertices)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    @cached_property
    def _parents(self) -> dict[str, tuple[str, ...]]:
        parents: dict[str, list[str]] = {v: [] for v in self.vertices}
        for s, t in self.edges:
            parents.setdefault(t, []).append(s)
        return {v: tuple(sorted(ps)) for v, ps in parents.items()}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        children: dict[str, list[str]] = {v: [] for v in self.vertices}
        for s, t in self.edges:
            children.setdefault(s, []).append(t)
        return {v: tuple(sorted(cs)) for v, cs in children.items()}

    def parents(self, vertex: str) -> tuple[str, ...]:
        return self._parents.get(vertex, ())

    def children(self, vertex: str) -> tuple[str, ...]:
        return self._children.get(vertex, ())

    def subgraph(self, keep: Iterable[str]) -> CausalDiagram:
        """Induced subgraph on ``keep``; edges touching other vertices are dropped."""
        kept = frozenset(keep) & self.vertices
        edges = frozenset((s, t) for s, t in self.edges if s in kept and t in kept)
        return CausalDiagram(kept, edges, self.exogenous & kept)

    def without_exogenous(self) -> CausalDiagram:
        return self.subgraph(self.endogenous)

    def with_vertices(self, extra: Iterable[str]) -> CausalDiagram:
        return CausalDiagram(self.vertices | frozenset(extra), self.edges, self.exogenous)


def _strongly_connected(vertices: Iterable[str], edges: Iterable[Edge]) -> list[list[str]]:
    """Tarjan's algorithm, iterative; components are returned with sorted members."""
    succ: dict[str, list[str]] = {v: [] for v in vertices}
    for s, t in edges:
        succ.setdefault(s, []).append(t)
        succ.setdefault(t, [])
    for v in succ:
        succ[v].sort()

    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []
    counter = 0

    for root in sorted(succ):
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                components.append(sorted(comp))
    return components


def find_cycles(vertices: Iterable[str], edges: Iterable[Edge]) -> list[list[str]]:
    """Vertex sets of every non-trivial strongly connected component, sorted."""
    edges = list(edges)
    self_loops = {s for s, t in edges if s == t}
    cycles = [c for c in _strongly_connected(vertices, edges) if len(c) > 1 or c[0] in self_loops]
    return sorted(cycles)


def is_acyclic(vertices: Iterable[str], edges: Iterable[Edge]) -> bool:
    return not find_cycles(vertices, edges)


def reaches(edges: Iterable[Edge], source: str, target: str) -> bool:
    """True iff a directed path (possibly empty) leads from source to target."""
    if source == target:
        return True
    succ: dict[str, list[str]] = {}
    for s, t in edges:
        succ.setdefault(s, []).append(t)
    seen = {source}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nxt in succ.get(node, ()):
            if nxt == target:
                return True
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def validate_diagram(d: CausalDiagram) -> list[str]:
    """Return the list of invariant violations; an empty list means the diagram is valid."""
    violations: list[str] = []
    for v in sorted(d.exogenous - d.vertices):
        violations.append(f"exogenous vertex not in vertex set: {v}")
    for v in sorted(d.vertices):
        if not isinstance(v, str) or not v:
            violations.append(f"invalid vertex name: {v!r}")
    for s, t in d.sorted_edges():
        for end in (s, t):
            if end not in d.vertices:
                violations.append(f"unknown vertex in edge {s}->{t}: {end}")
        if s == t:
            violations.append(f"self-loop: {s}->{t}")
        if t in d.exogenous:
            violations.append(f"edge into exogenous vertex: {s}->{t}")
    proper_edges = [(s, t) for s, t in d.edges if s != t]
    for cycle in find_cycles(d.vertices, proper_edges):
        violations.append("cycle: " + ",".join(cycle))
    return violations


def topological_order(d: CausalDiagram) -> list[str]:
    """Kahn's algorithm with lexicographic tie-breaking."""
    import heapq

    indegree = {v: 0 for v in d.vertices}
    for _, t in d.edges:
        indegree[t] += 1
    heap = [v for v, k in indegree.items() if k == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in d.children(v):
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(d.vertices):
        raise ModelError("diagram is cyclic")
    return order


def longest_path_length(d: CausalDiagram) -> int:
    """Number of edges on the longest directed path."""
    dist = {v: 0 for v in d.vertices}
    for v in topological_order(d):
        for c in d.children(v):
            dist[c] = max(dist[c], dist[v] + 1)
    return max(dist.values(), default=0)


def descendants(d: CausalDiagram, roots: Iterable[str]) -> frozenset[str]:
    """Vertices reachable from any root by at least one edge. Roots are excluded
    unless reachable from another root."""
    roots = list(roots)
    unknown = sorted(set(roots) - d.vertices)
    if unknown:
        raise ModelError(f"unknown vertex: {', '.join(unknown)}")
    seen: set[str] = set()
    queue = deque(roots)
    while queue:
        node = queue.popleft()
        for c in d.children(node):
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return frozenset(seen)


@dataclass(frozen=True)
class StructuralEquation:
    """Lookup-table equation ``target := table[parent values]``.

    ``parents`` fixes the order of the key tuples in ``table``.
    """

    target: str
    parents: tuple[str, ...]
    table: Mapping[tuple, Value] = field(hash=False)

    @classmethod
    def constant(cls, target: str, value: Value) -> StructuralEquation:
        return cls(target, (), {(): value})

    def __call__(self, values: Mapping[str, Value]) -> Value:
        return self.table[tuple(values[p] for p in self.parents)]


@dataclass(frozen=True)
class ScmModel:
    """A causal diagram plus structural equations, domains and root distributions.

    Exogenous variables are mutually independent; ``exogenous_distribution[u][k]``
    is the probability of ``domains[u][k]``. Construction raises ``ModelError`` if
    any invariant fails.
    """

    diagram: CausalDiagram
    domains: Mapping[str, tuple[Value, ...]] = field(hash=False)
    equations: Mapping[str, StructuralEquation] = field(hash=False)
    exogenous_distribution: Mapping[str, tuple[Probability, ...]] = field(hash=False)

    def __post_init__(self) -> None:
        violations = model_violations(self)
        if violations:
            raise ModelError(violations)

    @cached_property
    def order(self) -> tuple[str, ...]:
        return tuple(v for v in topological_order(self.diagram) if v not in self.diagram.exogenous)

    @cached_property
    def exogenous_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.diagram.exogenous))

    @property
    def endogenous(self) -> frozenset[str]:
        return self.diagram.endogenous


def model_violations(m: ScmModel) -> list[str]:
    d = m.diagram
    violations = validate_diagram(d)
    if violations:
        return violations
    for v in d.sorted_vertices():
        dom = m.domains.get(v)
        if not dom:
            violations.append(f"missing or empty domain: {v}")
        elif len(set(dom)) != len(dom):
            violations.append(f"duplicate values in domain: {v}")
    if violations:
        return violations
    for u in sorted(d.exogenous):
        probs = m.exogenous_distribution.get(u)
        if probs is None:
            violations.append(f"missing distribution for exogenous variable: {u}")
            continue
        if len(probs) != len(m.domains[u]):
            violations.append(f"distribution length does not match domain: {u}")
            continue
        if any(p < 0 for p in probs):
            violations.append(f"negative probability: {u}")
        if abs(sum(probs) - 1) > PROB_TOL:
            violations.append(f"distribution does not sum to 1: {u}")
    for u in sorted(set(m.exogenous_distribution) - d.exogenous):
        violations.append(f"distribution for non-exogenous variable: {u}")
    for v in sorted(d.endogenous):
        eq = m.equations.get(v)
        if eq is None:
            violations.append(f"missing equation: {v}")
            continue
        if eq.target != v:
            violations.append(f"equation target mismatch: {v}")
        if set(eq.parents) != set(d.parents(v)) or len(eq.parents) != len(d.parents(v)):
            violations.append(f"equation parents do not match diagram: {v}")
            continue
        for key in itertools.product(*(m.domains[p] for p in eq.parents)):
            if key not in eq.table:
                violations.append(f"equation table not total: {v} missing {list(key)}")
                break
            if eq.table[key] not in m.domains[v]:
                violations.append(f"equation value outside domain: {v}[{list(key)}]")
                break
    for v in sorted(set(m.equations) - d.endogenous):
        violations.append(f"equation for non-endogenous variable: {v}")
    return violations


@dataclass(frozen=True)
class Intervention:
    assignments: Mapping[str, Value] = field(hash=False)


def evaluate(
    m: ScmModel, context: Mapping[str, Value], order: Sequence[str] | None = None
) -> dict[str, Value]:
    """Propagate a context through the equations; returns every endogenous value.

    ``order`` may supply an alternative topological order of the endogenous variables.
    """
    values: dict[str, Value] = {}
    for u in m.exogenous_order:
        values[u] = context[u]
    if order is None:
        order = m.order
    elif sorted(order) != sorted(m.order):
        raise ModelError("order must list every endogenous variable exactly once")
    for v in order:
        eq = m.equations[v]
        try:
            values[v] = eq.table[tuple(values[p] for p in eq.parents)]
        except KeyError as exc:
            raise ModelError(f"order is not topological at {v}") from exc
    return {v: values[v] for v in order}


def intervene(m: ScmModel, intervention: Intervention | Mapping[str, Value]) -> ScmModel:
    """Return the model under ``do(X=x)``: forced constants, incoming edges removed."""
    assignments = (
        intervention.assignments if isinstance(intervention, Intervention) else intervention
    )
    problems = []
    for v, x in sorted(assignments.items()):
        if v not in m.endogenous:
            problems.append(f"intervention target is not endogenous: {v}")
        elif x not in m.domains[v]:
            problems.append(f"intervention value outside domain: {v}={x!r}")
    if problems:
        raise ModelError(problems)
    targets = set(assignments)
    edges = frozenset((s, t) for s, t in m.diagram.edges if t not in targets)
    diagram = CausalDiagram(m.diagram.vertices, edges, m.diagram.exogenous)
    equations = dict(m.equations)
    for v, x in assignments.items():
        equations[v] = StructuralEquation.constant(v, x)
    return ScmModel(diagram, m.domains, equations, m.exogenous_distribution)


def contexts(m: ScmModel) -> Iterator[tuple[dict[str, Value], Probability]]:
    """Every context of positive probability with its probability, in lexicographic order."""
    roots = m.exogenous_order
    per_root = []
    for u in roots:
        per_root.append(
            [(x, p) for x, p in zip(m.domains[u], m.exogenous_distribution[u]) if p > 0]
        )
    for combo in itertools.product(*per_root):
        prob: Probability = 1
        assignment = {}
        for u, (x, p) in zip(roots, combo):
            assignment[u] = x
            prob = prob * p
        yield assignment, prob


def observational_distribution(
    m: ScmModel, targets: Iterable[str]
) -> dict[tuple[Value, ...], Probability]:
    """Joint distribution of ``targets`` (keys ordered by sorted target name).

    Every combination of domain values appears, including zero-probability ones.
    """
    names = sorted(targets)
    unknown = [t for t in names if t not in m.endogenous]
    if unknown:
        raise ModelError(f"not an endogenous variable: {', '.join(unknown)}")
    table: dict[tuple[Value, ...], Probability] = {
        key: Fraction(0) for key in itertools.product(*(m.domains[t] for t in names))
    }
    for ctx, p in contexts(m):
        values = evaluate(m, ctx)
        key = tuple(values[t] for t in names)
        table[key] += p
    return table
