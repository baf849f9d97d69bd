"""Small builders shared by the test modules."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from fairpool.causal_core import CausalDiagram, ScmModel, StructuralEquation

BINARY = (0, 1)


def build_model(
    equations: Mapping[str, tuple[Sequence[str], Callable[..., object]]],
    roots: Mapping[str, Sequence[Fraction]],
    domains: Mapping[str, Sequence] | None = None,
) -> ScmModel:
    """SCM from ``{target: (parents, fn)}``; tables are tabulated from ``fn``."""
    domains = dict(domains or {})
    names = set(equations) | set(roots)
    for v in names:
        domains.setdefault(v, BINARY)
    edges = [(p, v) for v, (parents, _) in equations.items() for p in parents]
    diagram = CausalDiagram.from_edges(edges, names, exogenous=roots)
    eqs = {}
    for v, (parents, fn) in equations.items():
        table = {
            key: fn(*key) for key in itertools.product(*(domains[p] for p in parents))
        }
        eqs[v] = StructuralEquation(v, tuple(parents), table)
    dists = {u: tuple(Fraction(p) for p in probs) for u, probs in roots.items()}
    return ScmModel(diagram, {k: tuple(v) for k, v in domains.items()}, eqs, dists)


HALF = (Fraction(1, 2), Fraction(1, 2))
