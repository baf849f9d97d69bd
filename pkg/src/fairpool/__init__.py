"""Pooling of expert causal models under counterfactual fairness."""

from fairpool.causal_core import (
    CausalDiagram,
    Intervention,
    ModelError,
    ScmModel,
    StructuralEquation,
    descendants,
    evaluate,
    intervene,
    observational_distribution,
    validate_diagram,
)
from fairpool.fair_pooling import (
    Algorithm,
    PoolingReport,
    compare_algorithms,
    pooling_removal,
    removal_pooling,
)
from fairpool.fairness import (
    FairnessPartition,
    FairnessVerdict,
    check_fair_bruteforce,
    check_fair_lemma1,
)
from fairpool.judgment_aggregation import (
    AggregationRule,
    EdgeJudgmentProfile,
    EdgeLayering,
    TieBreak,
    apply_rule,
    demonstrate_impossibility,
    layer_edges,
    pool_edges,
)
from fairpool.opinion_pooling import linear_pool, pool_root_distributions

__version__ = "0.1.0"
