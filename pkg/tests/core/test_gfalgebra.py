import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpire.core.gfalgebra import (
    IDENTITY,
    FracLinCoef,
    clan_prob,
    flin_compose,
    flin_eval,
    flin_fold,
    flin_fold_left,
    flin_from_increment,
    log_clan_probs,
    log_reversed_weights,
    no_survivor_prob,
    reversed_rep_weight,
    suffix_coefficients,
    survival_prob,
)
from bpire.core.walk import WalkPath, simulate_path, simulate_paths
from bpire.errors import DomainError
from bpire.schema.enums import ConventionEnum
from bpire.schema.law import GaussianLaw
from bpire.utils.rng import StreamSpec

increments = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
coefs = st.builds(
    FracLinCoef,
    log_A=st.floats(min_value=-20.0, max_value=20.0),
    log_B=st.floats(min_value=-20.0, max_value=20.0),
)


def _coef(a: float, b: float) -> FracLinCoef:
    return FracLinCoef(log_A=math.log(a), log_B=math.log(b) if b > 0 else -math.inf)


def _step(x: float, s: float) -> float:
    # F(s) = q / (1 - p s), p / q = e^x
    q = 1.0 / (1.0 + math.exp(x))
    return q / (1.0 - (1.0 - q) * s)


@pytest.mark.parametrize(('x', 'f0'), [(0.0, 0.5), (math.log(3.0), 0.25), (-math.log(3.0), 0.75)])
def test_flin_from_increment(x: float, f0: float) -> None:
    coef = flin_from_increment(x)

    assert coef.A == pytest.approx(math.exp(-x))
    assert coef.B == 1.0
    assert flin_eval(coef, 0.0) == pytest.approx(f0)


def test_flin_from_increment_stays_in_log_domain() -> None:
    assert flin_from_increment(-700.0).log_A == 700.0

    with pytest.raises(DomainError):
        flin_from_increment(math.inf)


@pytest.mark.parametrize(
    ('left', 'right', 'expected'),
    [
        ((2.0, 1.0), (1.0, 0.0), (2.0, 1.0)),
        ((1.0, 0.0), (2.0, 1.0), (2.0, 1.0)),
        ((2.0, 1.0), (0.5, 3.0), (1.0, 7.0)),
    ],
)
def test_flin_compose(left: tuple, right: tuple, expected: tuple) -> None:
    composed = flin_compose(_coef(*left), _coef(*right))

    assert composed.A == pytest.approx(expected[0])
    assert composed.B == pytest.approx(expected[1])


@settings(max_examples=200, deadline=None)
@given(coefs, coefs, coefs)
def test_flin_compose_is_associative(a: FracLinCoef, b: FracLinCoef, c: FracLinCoef) -> None:
    left = flin_compose(flin_compose(a, b), c)
    right = flin_compose(a, flin_compose(b, c))

    assert left.log_A == pytest.approx(right.log_A, abs=1e-9)
    assert left.log_B == pytest.approx(right.log_B, abs=1e-9)


@settings(deadline=None)
@given(coefs)
def test_identity_is_neutral(coef: FracLinCoef) -> None:
    assert flin_compose(IDENTITY, coef) == coef
    assert flin_compose(coef, IDENTITY).log_B == pytest.approx(coef.log_B, abs=1e-12)


@settings(deadline=None)
@given(st.lists(increments, min_size=1, max_size=40))
def test_pairwise_and_left_folds_agree(xs: list) -> None:
    tree = flin_fold(xs)
    left = flin_fold_left(xs)

    assert tree.log_A == pytest.approx(left.log_A, abs=1e-9)
    assert tree.log_B == pytest.approx(left.log_B, abs=1e-9)


@pytest.mark.parametrize('s', [0.0, 0.3, 0.9])
def test_fold_matches_iterated_maps(stream: StreamSpec, s: float) -> None:
    path = simulate_path(GaussianLaw(), 12, stream.generator())
    value = s
    for x in reversed(path.increments):
        value = _step(float(x), value)

    assert flin_eval(flin_fold_left(path.increments), s) == pytest.approx(value, abs=1e-11)


def test_flin_eval() -> None:
    assert flin_eval(IDENTITY, 0.42) == pytest.approx(0.42)
    assert flin_eval(flin_fold(np.zeros(3)), 0.0) == pytest.approx(0.75)
    values = [flin_eval(flin_from_increment(0.3), s) for s in (0.9, 0.99, 0.999999)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize('s', [-0.1, 1.0, 1.5])
def test_flin_eval_rejects_argument(s: float) -> None:
    with pytest.raises(DomainError):
        flin_eval(IDENTITY, s)


def test_suffix_coefficients_agree_with_folds(stream: StreamSpec) -> None:
    path = simulate_path(GaussianLaw(), 10, stream.generator())

    for k, coef in enumerate(suffix_coefficients(path)):
        folded = flin_fold_left(path.increments[k:])
        assert coef.log_A == pytest.approx(folded.log_A, abs=1e-10)
        assert coef.log_B == pytest.approx(folded.log_B, abs=1e-10)


@pytest.mark.parametrize(
    ('i', 'convention', 'expected'),
    [
        (2, ConventionEnum.paper_corollary, 0.125),
        (2, ConventionEnum.strict, 0.1),
        (0, ConventionEnum.paper_corollary, 0.05),
        (0, ConventionEnum.strict, 0.05),
        (3, ConventionEnum.paper_corollary, 0.25),
        (3, ConventionEnum.strict, 0.2),
    ],
)
def test_clan_prob_on_flat_path(i: int, convention: ConventionEnum, expected: float) -> None:
    probability = clan_prob(WalkPath.from_increments(np.zeros(4)), i, convention)

    assert probability.h == pytest.approx(expected, rel=1e-14)
    assert probability.convention == convention


@pytest.mark.parametrize('x', [-2.0, 0.0, 0.7])
def test_single_generation_probabilities(x: float) -> None:
    path = WalkPath.from_increments(np.array([x]))

    assert clan_prob(path, 0).h == pytest.approx(1.0 / (1.0 + math.exp(-x)))
    assert no_survivor_prob(path) == pytest.approx(1.0 / (1.0 + math.exp(x)))


@pytest.mark.parametrize('i', [-1, 4])
def test_clan_prob_rejects_index(i: int) -> None:
    with pytest.raises(DomainError):
        clan_prob(WalkPath.from_increments(np.zeros(4)), i)


def test_vectorized_clan_probs_match_scalar(stream: StreamSpec) -> None:
    sums = simulate_paths(GaussianLaw(), 9, 5, stream.generator())

    for convention in ConventionEnum:
        table = log_clan_probs(sums, convention)
        for row in range(5):
            path = WalkPath.from_partial_sums(sums[row])
            for i in range(9):
                assert table[row, i] == pytest.approx(clan_prob(path, i, convention).log_h, abs=1e-12)


def test_no_survivor_matches_product(stream: StreamSpec) -> None:
    path = simulate_path(GaussianLaw(), 10, stream.generator())
    product = math.prod(flin_eval(coef, 0.0) for coef in suffix_coefficients(path))

    assert no_survivor_prob(path) == pytest.approx(product, rel=1e-11)
    assert no_survivor_prob(WalkPath.from_increments(np.zeros(4))) == pytest.approx(0.2)


def test_survival_prob_on_flat_path() -> None:
    assert survival_prob(WalkPath.from_increments(np.zeros(3))) == pytest.approx(0.25)


def test_strict_decomposition_never_exceeds_one(stream: StreamSpec) -> None:
    sums = simulate_paths(GaussianLaw(), 12, 200, stream.generator())
    total = np.exp(log_clan_probs(sums, ConventionEnum.strict)).sum(axis=1) + np.array(
        [no_survivor_prob(WalkPath.from_partial_sums(row)) for row in sums]
    )

    assert np.all(total <= 1.0 + 1e-12)


def test_reversed_weight_on_flat_path() -> None:
    path = WalkPath.from_increments(np.zeros(4))

    assert reversed_rep_weight(path, 2) == pytest.approx(0.125)
    assert reversed_rep_weight(path, 4) == pytest.approx(clan_prob(path, 0).h)


def test_reversed_weight_on_steep_path() -> None:
    sums = np.array([[0.0, 3.0, 6.0]])

    assert float(np.exp(log_reversed_weights(sums, 1))[0]) == pytest.approx(math.exp(3.0) / (1.0 + math.exp(3.0)))
    assert float(np.exp(log_reversed_weights(sums, 2))[0]) == pytest.approx(
        math.exp(6.0) / (1.0 + math.exp(3.0) + math.exp(6.0)) / (1.0 + math.exp(3.0))
    )


@pytest.mark.parametrize('x', [-3.0, 0.0, 2.0])
def test_reversed_weight_single_step(x: float) -> None:
    # at j = n the first sum includes S_n
    assert reversed_rep_weight(WalkPath.from_increments(np.array([x])), 1) == pytest.approx(1.0 / (1.0 + math.exp(-x)))


def test_reversed_weights_are_bounded(stream: StreamSpec) -> None:
    sums = simulate_paths(GaussianLaw(sigma=3.0), 16, 500, stream.generator())

    for j in (1, 8, 16):
        assert np.all(log_reversed_weights(sums, j) <= 1e-12)


@pytest.mark.parametrize('j', [0, 5])
def test_reversed_weight_rejects_index(j: int) -> None:
    with pytest.raises(DomainError):
        reversed_rep_weight(WalkPath.from_increments(np.zeros(4)), j)
