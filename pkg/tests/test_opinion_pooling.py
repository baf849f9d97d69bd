import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairpool.opinion_pooling import PoolingError, linear_pool, pool_root_distributions

from helpers import build_model


def test_equal_weights_average():
    assert linear_pool([(0.2, 0.8), (0.6, 0.4)], (0.5, 0.5)) == (Fraction(2, 5), Fraction(3, 5))


def test_unanimous_input_is_returned():
    p = (Fraction(1, 3), Fraction(1, 6), Fraction(1, 2))
    assert linear_pool([p, p, p], (0.2, 0.3, 0.5)) == p


def test_dictator_weight():
    dists = [(0.1, 0.9), (0.5, 0.5), (1, 0)]
    assert linear_pool(dists, (1, 0, 0)) == (Fraction(1, 10), Fraction(9, 10))


def test_three_experts_hand_arithmetic():
    # 0.5*0.1 + 0.3*0.4 + 0.2*1.0 = 0.05 + 0.12 + 0.20 = 0.37
    out = linear_pool([(0.1, 0.9), (0.4, 0.6), (1.0, 0.0)], (0.5, 0.3, 0.2))
    assert out == (Fraction(37, 100), Fraction(63, 100))


@pytest.mark.parametrize(
    "dists, weights",
    [
        ([(0.5, 0.5), (1.0,)], (0.5, 0.5)),
        ([(0.5, 0.5), (0.5, 0.5)], (0.6, 0.6)),
        ([(0.5, 0.5), (0.5, 0.5)], (1.2, -0.2)),
        ([(0.5, 0.6), (0.5, 0.5)], (0.5, 0.5)),
        ([(0.5, 0.5)], (0.5, 0.5)),
    ],
)
def test_invalid_inputs(dists, weights):
    with pytest.raises(PoolingError):
        linear_pool(dists, weights)


def _expert(p1):
    return build_model({"V": (["U"], lambda u: u)}, {"U": (1 - Fraction(p1), Fraction(p1))})


def test_pool_two_roots():
    pooled = pool_root_distributions([_expert("3/10"), _expert("1/2")], (0.5, 0.5))
    assert pooled == {"U": (Fraction(3, 5), Fraction(2, 5))}


def test_pool_single_expert_identity():
    m = _expert("1/7")
    assert pool_root_distributions([m]) == {"U": m.exogenous_distribution["U"]}


def test_pool_three_experts_hand_arithmetic():
    # 1/4*0.2 + 1/4*0.6 + 1/2*0.9 = 0.05 + 0.15 + 0.45 = 0.65
    pooled = pool_root_distributions(
        [_expert("1/5"), _expert("3/5"), _expert("9/10")], ("1/4", "1/4", "1/2")
    )
    assert pooled["U"][1] == Fraction(13, 20)


def test_pool_domain_mismatch():
    other = build_model({"V": (["W"], lambda u: u)}, {"W": (0.5, 0.5)})
    with pytest.raises(PoolingError):
        pool_root_distributions([_expert("1/2"), other])


def _random_profile(rng, n, k):
    dists = []
    for _ in range(n):
        raw = [rng.random() for _ in range(k)]
        total = sum(raw)
        dists.append(tuple(x / total for x in raw))
    raw_w = [rng.random() for _ in range(n)]
    w = tuple(x / sum(raw_w) for x in raw_w)
    return dists, w


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_normalization_and_event_wise_independence(seed):
    rng = random.Random(seed)
    n, k = rng.randint(1, 5), rng.randint(2, 5)
    dists, w = _random_profile(rng, n, k)
    out = linear_pool(dists, w)
    assert abs(sum(out) - 1) < 1e-9
    # perturb every entry except index 0 (mass moves among the others): entry 0 is unchanged
    perturbed = []
    for d in dists:
        rest = [rng.random() for _ in range(k - 1)]
        scale = (1 - d[0]) / sum(rest)
        perturbed.append((d[0], *(r * scale for r in rest)))
    assert abs(linear_pool(perturbed, w)[0] - out[0]) < 1e-9
