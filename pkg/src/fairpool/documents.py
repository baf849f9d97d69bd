"""JSON model documents, pooling-report serialization and DOT export.

A model document describes one expert's causal model::

    {
      "schema_version": 1,
      "predictor": "Y",
      "variables": [{"name": "A", "kind": "endogenous", "domain": [0, 1]}, ...],
      "edges": [["A", "Y"], ...],
      "equations": {"Y": {"parents": ["A"], "table": [[[0], 0], [[1], 1]]}},
      "exogenous_distributions": {"U_A": [0.5, 0.5]}
    }

``equations`` and ``exogenous_distributions`` are optional. Canonical output
sorts variables, edges, parents and table rows so that serialization is a fixed
point of parse followed by dump.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema

from fairpool.causal_core import (
    CausalDiagram,
    Edge,
    ModelError,
    Probability,
    ScmModel,
    StructuralEquation,
    Value,
    as_probability,
    validate_diagram,
)
from fairpool.fair_pooling import PoolingReport
from fairpool.fairness import FairnessVerdict, Lemma1Result

SCHEMA_VERSION = 1
DEFAULT_DOMAIN: tuple[Value, ...] = (0, 1)
IMPLICIT_ROOT_PREFIX = "U_"

_SCALAR = {"type": ["integer", "string"]}

MODEL_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "predictor", "variables", "edges"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "predictor": {"type": "string", "minLength": 1},
        "variables": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "kind"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "kind": {"enum": ["exogenous", "endogenous"]},
                    "domain": {"type": "array", "minItems": 1, "items": _SCALAR},
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "string", "minLength": 1},
            },
        },
        "equations": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": False,
                "required": ["parents", "table"],
                "properties": {
                    "parents": {"type": "array", "items": {"type": "string"}},
                    "table": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "minItems": 2,
                            "maxItems": 2,
                            "items": [{"type": "array", "items": _SCALAR}, _SCALAR],
                        },
                    },
                },
            },
        },
        "exogenous_distributions": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "minItems": 1,
                "items": {"type": ["number", "string"]},
            },
        },
    },
}


class DocumentError(ValueError):
    """A document failed validation; ``violations`` carries one message per problem."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("\n".join(self.violations))


class DocumentIOError(OSError):
    """The file could not be read or is not well-formed JSON."""


@dataclass(frozen=True)
class VariableSpec:
    name: str
    kind: str
    domain: tuple[Value, ...] | None = None


@dataclass(frozen=True)
class ModelDocument:
    predictor: str
    variables: tuple[VariableSpec, ...]
    edges: tuple[Edge, ...]
    equations: Mapping[str, StructuralEquation] | None = field(default=None, hash=False)
    exogenous_distributions: Mapping[str, tuple[Probability, ...]] | None = field(
        default=None, hash=False
    )
    schema_version: int = SCHEMA_VERSION
    source: str = field(default="<document>", compare=False)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def exogenous(self) -> frozenset[str]:
        return frozenset(v.name for v in self.variables if v.kind == "exogenous")

    @property
    def endogenous(self) -> frozenset[str]:
        return frozenset(v.name for v in self.variables if v.kind == "endogenous")

    def domain(self, name: str) -> tuple[Value, ...]:
        for v in self.variables:
            if v.name == name:
                return v.domain if v.domain is not None else DEFAULT_DOMAIN
        raise KeyError(name)

    def diagram(self) -> CausalDiagram:
        return CausalDiagram(frozenset(self.names), frozenset(self.edges), self.exogenous)

    @property
    def has_equations(self) -> bool:
        return self.equations is not None

    def to_model(self) -> ScmModel:
        """Build the SCM; raises ``ModelError`` when the document lacks equations or is inconsistent.

        Documents without exogenous variables get an implicit uniform binary root
        ``U_<name>`` for each parentless endogenous variable that has no equation;
        that variable copies its root onto its (two-valued) domain.
        """
        if self.equations is None:
            raise ModelError("document has no structural equations")
        diagram = self.diagram()
        domains = {v.name: self.domain(v.name) for v in self.variables}
        equations = dict(self.equations)
        dists = dict(self.exogenous_distributions or {})
        if not self.exogenous:
            problems = []
            edges = set(diagram.edges)
            roots = []
            for v in sorted(self.endogenous - set(equations)):
                if diagram.parents(v):
                    problems.append(f"missing equation: {v}")
                    continue
                if len(domains[v]) != 2:
                    problems.append(f"implicit root needs a two-valued domain: {v}")
                    continue
                root = IMPLICIT_ROOT_PREFIX + v
                if root in domains:
                    problems.append(f"implicit root name already used: {root}")
                    continue
                roots.append(root)
                edges.add((root, v))
                domains[root] = (0, 1)
                dists[root] = (Fraction(1, 2), Fraction(1, 2))
                equations[v] = StructuralEquation(v, (root,), {(0,): domains[v][0], (1,): domains[v][1]})
            if problems:
                raise ModelError(problems)
            diagram = CausalDiagram(diagram.vertices | set(roots), frozenset(edges), frozenset(roots))
        elif self.exogenous_distributions is None:
            raise ModelError("document has no exogenous distributions")
        return ScmModel(diagram, domains, equations, dists)


# -- parsing ------------------------------------------------------------------


def _json_path(path: Iterable[Any]) -> str:
    out = "$"
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def parse_document(obj: Any, source: str = "<document>") -> ModelDocument:
    """Validate a decoded JSON object and build a ``ModelDocument``."""
    validator = jsonschema.Draft7Validator(MODEL_SCHEMA)
    schema_errors = sorted(validator.iter_errors(obj), key=lambda e: list(map(str, e.absolute_path)))
    if schema_errors:
        raise DocumentError(
            [f"{source}: {_json_path(e.absolute_path)}: {e.message}" for e in schema_errors]
        )

    problems: list[str] = []

    def bad(where: str, msg: str) -> None:
        problems.append(f"{source}: {where}: {msg}")

    variables = []
    seen: set[str] = set()
    for i, raw in enumerate(obj["variables"]):
        name = raw["name"]
        if name in seen:
            bad(f"$.variables[{i}]", f"duplicate variable name {name!r}")
        seen.add(name)
        domain = tuple(raw["domain"]) if "domain" in raw else None
        if domain is not None and len(set(domain)) != len(domain):
            bad(f"$.variables[{i}].domain", "duplicate domain values")
        variables.append(VariableSpec(name, raw["kind"], domain))

    kinds = {v.name: v.kind for v in variables}
    predictor = obj["predictor"]
    if predictor not in kinds:
        bad("$.predictor", f"unknown variable {predictor!r}")
    elif kinds[predictor] != "endogenous":
        bad("$.predictor", "predictor must be endogenous")

    edges: list[Edge] = []
    for i, (s, t) in enumerate(obj["edges"]):
        for end in (s, t):
            if end not in kinds:
                bad(f"$.edges[{i}]", f"unknown vertex {end!r}")
        if (s, t) in edges:
            bad(f"$.edges[{i}]", f"duplicate edge {s}->{t}")
        edges.append((s, t))
    if problems:
        raise DocumentError(problems)

    doc = ModelDocument(predictor, tuple(variables), tuple(edges), source=source)
    for msg in validate_diagram(doc.diagram()):
        bad("$.edges", msg)
    if problems:
        raise DocumentError(problems)

    equations = None
    if "equations" in obj:
        equations = {}
        for target, raw in obj["equations"].items():
            where = f"$.equations.{target}"
            if kinds.get(target) != "endogenous":
                bad(where, "equation target must be an endogenous variable")
                continue
            parents = tuple(raw["parents"])
            unknown = [p for p in parents if p not in kinds]
            if unknown:
                bad(where, f"unknown parent(s) {', '.join(unknown)}")
                continue
            table: dict[tuple, Value] = {}
            for k, (key, value) in enumerate(raw["table"]):
                key = tuple(key)
                if len(key) != len(parents):
                    bad(f"{where}.table[{k}]", f"key has {len(key)} values, expected {len(parents)}")
                    continue
                if key in table:
                    bad(f"{where}.table[{k}]", f"duplicate key {list(key)}")
                table[key] = value
            equations[target] = StructuralEquation(target, parents, table)

    dists = None
    if "exogenous_distributions" in obj:
        dists = {}
        for name, raw in obj["exogenous_distributions"].items():
            where = f"$.exogenous_distributions.{name}"
            if kinds.get(name) != "exogenous":
                bad(where, "distribution given for a non-exogenous variable")
                continue
            try:
                dists[name] = tuple(as_probability(x) for x in raw)
            except (ValueError, ZeroDivisionError, TypeError) as exc:
                bad(where, f"invalid probability ({exc})")
    if problems:
        raise DocumentError(problems)

    doc = ModelDocument(
        predictor, tuple(variables), tuple(edges), equations, dists, obj["schema_version"], source
    )
    if equations is not None:
        try:
            doc.to_model()
        except ModelError as exc:
            raise DocumentError([f"{source}: $.equations: {msg}" for msg in exc.violations]) from None
    elif dists is not None:
        raise DocumentError([f"{source}: $.exogenous_distributions: given without equations"])
    return doc


def load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentIOError(f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentIOError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None


def load_document(path: str | Path) -> ModelDocument:
    return parse_document(load_json(path), str(path))


def check_consistency(docs: Sequence[ModelDocument]) -> list[str]:
    """Documents pooled together must share endogenous variables and predictor."""
    if not docs:
        return []
    ref = docs[0]
    problems = []
    for doc in docs[1:]:
        if doc.endogenous != ref.endogenous:
            only_ref = sorted(ref.endogenous - doc.endogenous)
            only_doc = sorted(doc.endogenous - ref.endogenous)
            problems.append(
                f"{doc.source}: vertex-set mismatch with {ref.source}"
                f" (missing: {', '.join(only_ref) or '-'}; extra: {', '.join(only_doc) or '-'})"
            )
        if doc.predictor != ref.predictor:
            problems.append(
                f"{doc.source}: predictor mismatch with {ref.source}"
                f" ({doc.predictor!r} vs {ref.predictor!r})"
            )
    return problems


# -- canonical serialization --------------------------------------------------


def probability_to_json(p: Probability) -> float | str:
    """Decimal-exact probabilities become JSON numbers, other rationals ``"p/q"`` strings."""
    if isinstance(p, float):
        return p
    f = float(p)
    if Fraction(repr(f)) == p:
        return f
    return f"{p.numerator}/{p.denominator}"


def document_to_json(doc: ModelDocument) -> dict[str, Any]:
    out: dict[str, Any] = {"schema_version": doc.schema_version, "predictor": doc.predictor}
    variables = []
    for v in sorted(doc.variables, key=lambda v: v.name):
        entry: dict[str, Any] = {"name": v.name, "kind": v.kind}
        if v.domain is not None:
            entry["domain"] = list(v.domain)
        variables.append(entry)
    out["variables"] = variables
    out["edges"] = [list(e) for e in sorted(doc.edges)]
    if doc.equations is not None:
        eqs = {}
        for target in sorted(doc.equations):
            eq = doc.equations[target]
            parents = sorted(eq.parents)
            perm = [eq.parents.index(p) for p in parents]
            rows = []
            for key in itertools.product(*(doc.domain(p) for p in parents)):
                original = [None] * len(parents)
                for pos, src in enumerate(perm):
                    original[src] = key[pos]
                rows.append([list(key), eq.table[tuple(original)]])
            eqs[target] = {"parents": parents, "table": rows}
        out["equations"] = eqs
    if doc.exogenous_distributions is not None:
        out["exogenous_distributions"] = {
            u: [probability_to_json(p) for p in doc.exogenous_distributions[u]]
            for u in sorted(doc.exogenous_distributions)
        }
    return out


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def dump_document(doc: ModelDocument) -> str:
    return dumps(document_to_json(doc))


# -- reports --------------------------------------------------------------------


def diagram_to_json(d: CausalDiagram) -> dict[str, Any]:
    return {"vertices": d.sorted_vertices(), "edges": [list(e) for e in d.sorted_edges()]}


def report_to_json(
    report: PoolingReport,
    rule: str,
    tie_break: str,
    seed: int | None,
    sources: Sequence[str] = (),
) -> dict[str, Any]:
    p = report.partition
    out: dict[str, Any] = {
        "algorithm": report.algorithm.value,
        "rule": rule,
        "tie_break": tie_break,
        "seed": seed,
        "experts": list(sources),
        "predictor": p.predictor,
        "protected": sorted(p.protected),
        "pooled_diagram": diagram_to_json(report.pooled_diagram),
        "predictor_inputs": sorted(report.predictor_inputs),
        "removed_vertices": sorted(report.removed_vertices),
        "fairness_certificate": report.fairness_certificate,
        "audit_trail": [
            {
                "edge": list(r.edge),
                "depth": r.depth,
                "votes": list(r.votes),
                "rule_result": r.rule_result,
                "acyclic_ok": r.acyclic_ok,
                "inserted": r.inserted,
            }
            for r in report.audit_trail
        ],
        "intermediate": [diagram_to_json(d) for d in report.intermediate],
        "warnings": [],
    }
    if report.expert_removed:
        out["expert_removed"] = [sorted(r) for r in report.expert_removed]
    if not report.predictor_inputs:
        out["warnings"].append("predictor has no inputs: the pooled predictor is constant")
    return out


def is_report(obj: Any) -> bool:
    return isinstance(obj, dict) and "algorithm" in obj and "pooled_diagram" in obj


def diagram_from_report(obj: Mapping[str, Any]) -> tuple[CausalDiagram, str]:
    """The pooled diagram with removed vertices restored as isolated vertices."""
    try:
        pooled = obj["pooled_diagram"]
        vertices = set(pooled["vertices"]) | set(obj.get("removed_vertices", []))
        edges = frozenset((s, t) for s, t in pooled["edges"])
        predictor = obj["predictor"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError([f"malformed pooling report ({exc})"]) from None
    return CausalDiagram.from_edges(edges, vertices), predictor


def verdict_to_json(verdict: FairnessVerdict) -> dict[str, Any]:
    def dist(d: Mapping[Value, Probability]) -> list[list[Any]]:
        return [[y, probability_to_json(p)] for y, p in sorted(d.items(), key=lambda kv: repr(kv[0]))]

    return {
        "fair": verdict.fair,
        "witnesses": [
            {
                "context": dict(sorted(w.context.items())),
                "observed_protected": dict(sorted(w.observed_protected.items())),
                "observed_features": dict(sorted(w.observed_features.items())),
                "counterfactual_protected": dict(sorted(w.counterfactual_protected.items())),
                "factual_distribution": dist(w.factual_distribution),
                "counterfactual_distribution": dist(w.counterfactual_distribution),
            }
            for w in verdict.witnesses
        ],
    }


def lemma1_to_json(result: Lemma1Result) -> dict[str, Any]:
    return {"fair": result.holds, "offenders": sorted(result.offenders)}


# -- DOT export -----------------------------------------------------------------


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(
    d: CausalDiagram,
    predictor: str | None = None,
    protected: Iterable[str] = (),
    removed: Iterable[str] = (),
    name: str = "G",
) -> str:
    """Graphviz source for ``d``; removed vertices are drawn dashed and grey."""
    protected = set(protected)
    removed = set(removed)
    lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;", "  node [shape=ellipse];"]
    for v in sorted(set(d.vertices) | removed):
        attrs = []
        styles = []
        if v == predictor:
            attrs.append("peripheries=2")
        if v in d.exogenous:
            attrs.append("shape=box")
        if v in protected:
            styles.append("filled")
            attrs += ['fillcolor="#f4cccc"', 'xlabel="protected"']
        if v in removed:
            styles.append("dashed")
            attrs += ["color=gray50", "fontcolor=gray50"]
        if styles:
            attrs.append(f'style="{",".join(styles)}"')
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_dot_id(v)}{suffix};")
    for s, t in d.sorted_edges():
        lines.append(f"  {_dot_id(s)} -> {_dot_id(t)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
