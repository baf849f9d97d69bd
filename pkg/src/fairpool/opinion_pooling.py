"""Weighted linear pooling of expert probability vectors."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from fairpool.causal_core import PROB_TOL, Probability, ScmModel, as_probability


class PoolingError(ValueError):
    pass


def validate_weights(weights: Sequence) -> tuple[Probability, ...]:
    if not weights:
        raise PoolingError("weight vector is empty")
    w = tuple(as_probability(x) for x in weights)
    if any(x < 0 for x in w):
        raise PoolingError("weights must be non-negative")
    if abs(sum(w) - 1) > PROB_TOL:
        raise PoolingError("weights must sum to 1")
    return w


def uniform_weights(n: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, n) for _ in range(n))


def linear_pool(dists: Sequence[Sequence], weights: Sequence) -> tuple[Probability, ...]:
    """Pooled vector ``out[k] = sum_i w_i * dists[i][k]``."""
    w = validate_weights(weights)
    if len(dists) != len(w):
        raise PoolingError(f"{len(dists)} distributions but {len(w)} weights")
    size = len(dists[0])
    vectors = []
    for i, dist in enumerate(dists):
        if len(dist) != size:
            raise PoolingError("distributions are over different domains")
        vec = tuple(as_probability(x) for x in dist)
        if any(x < 0 for x in vec) or abs(sum(vec) - 1) > PROB_TOL:
            raise PoolingError(f"distribution {i} is not a probability vector")
        vectors.append(vec)
    return tuple(sum(wi * vec[k] for wi, vec in zip(w, vectors)) for k in range(size))


def pool_root_distributions(
    experts: Sequence[ScmModel], weights: Sequence | None = None
) -> dict[str, tuple[Probability, ...]]:
    """Pool each exogenous root independently across experts."""
    if not experts:
        raise PoolingError("no experts")
    if weights is None:
        weights = uniform_weights(len(experts))
    roots = experts[0].diagram.exogenous
    for m in experts[1:]:
        if m.diagram.exogenous != roots:
            raise PoolingError("experts disagree on exogenous variables")
        for u in roots:
            if tuple(m.domains[u]) != tuple(experts[0].domains[u]):
                raise PoolingError(f"experts disagree on the domain of {u}")
    return {
        u: linear_pool([m.exogenous_distribution[u] for m in experts], weights)
        for u in sorted(roots)
    }
