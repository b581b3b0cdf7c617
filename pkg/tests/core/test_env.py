import math

import numpy as np
import pytest

from tests.const import SEED

from bpire.core.env import (
    check_law,
    law_mgf,
    log_offspring_params,
    offspring_params,
    sample_increment,
    sample_increments,
    validate_hypotheses,
)
from bpire.errors import DomainError, InvalidLawError
from bpire.schema.law import (
    LAW_ADAPTER,
    DegenerateLaw,
    GaussianLaw,
    IncrementLaw,
    LaplaceLaw,
    TwoPointLatticeLaw,
    UniformLaw,
)
from bpire.utils.rng import StreamSpec, make_stream


@pytest.mark.parametrize(
    ('law', 'a2_ok', 'a3_ok', 'variance', 'exp_plus'),
    [
        (GaussianLaw(sigma=1.0), True, True, 1.0, math.exp(0.5)),
        (UniformLaw(half_width=1.0), True, True, 1.0 / 3.0, math.sinh(1.0)),
        (LaplaceLaw(scale=0.5), True, True, 0.5, 4.0 / 3.0),
        (TwoPointLatticeLaw(step=1.0), True, False, 1.0, math.cosh(1.0)),
    ],
)
def test_validate_hypotheses(law: IncrementLaw, a2_ok: bool, a3_ok: bool, variance: float, exp_plus: float) -> None:
    report = validate_hypotheses(law)

    assert report.a2_ok is a2_ok
    assert report.a3_ok is a3_ok
    assert report.moments.mean == 0.0
    assert report.moments.variance == pytest.approx(variance)
    assert report.moments.exp_plus == pytest.approx(exp_plus)
    assert report.moments.exp_minus == pytest.approx(exp_plus)
    assert bool(report.notes) is not a3_ok


def test_degenerate_law_fails_moment_conditions() -> None:
    report = validate_hypotheses(DegenerateLaw())

    assert not report.a2_ok
    assert not report.a3_ok


@pytest.mark.parametrize(
    ('law', 'parameter'),
    [
        (GaussianLaw(sigma=0.0), 'sigma'),
        (GaussianLaw(sigma=-1.0), 'sigma'),
        (UniformLaw(half_width=0.0), 'half_width'),
        (LaplaceLaw(scale=1.0), 'scale'),
        (LaplaceLaw(scale=0.0), 'scale'),
        (TwoPointLatticeLaw(step=-0.5), 'step'),
        (GaussianLaw(sigma=math.inf), 'sigma'),
    ],
)
def test_check_law_names_parameter(law: IncrementLaw, parameter: str) -> None:
    with pytest.raises(InvalidLawError) as exc_info:
        check_law(law)

    assert exc_info.value.parameter == parameter
    assert parameter in str(exc_info.value)


def test_law_adapter_dispatches_on_family() -> None:
    law = LAW_ADAPTER.validate_python({'family': 'uniform', 'half_width': 2.0})

    assert isinstance(law, UniformLaw)
    assert law.half_width == 2.0


def test_laplace_mgf_diverges_at_reciprocal_scale() -> None:
    assert law_mgf(LaplaceLaw(scale=0.5), 2.0) == math.inf
    assert law_mgf(GaussianLaw(sigma=100.0), 1.0) == math.inf


def test_lattice_support(stream: StreamSpec) -> None:
    draws = sample_increments(TwoPointLatticeLaw(step=1.0), stream.generator(), 1000)

    assert set(np.unique(draws)) <= {-1.0, 1.0}
    assert sample_increment(TwoPointLatticeLaw(step=1.0), stream.generator()) in (-1.0, 1.0)


def test_gaussian_sample_mean(stream: StreamSpec) -> None:
    draws = sample_increments(GaussianLaw(sigma=1.0), stream.generator(), 10**6)

    assert abs(draws.mean()) <= 4e-3


def test_same_stream_replays() -> None:
    first = sample_increments(GaussianLaw(), make_stream(SEED, 7), 64)
    second = sample_increments(GaussianLaw(), make_stream(SEED, 7), 64)
    other = sample_increments(GaussianLaw(), make_stream(SEED, 8), 64)

    assert np.array_equal(first, second)
    assert not np.array_equal(first, other)


@pytest.mark.parametrize(
    ('x', 'p', 'q'),
    [
        (0.0, 0.5, 0.5),
        (math.log(2.0), 2.0 / 3.0, 1.0 / 3.0),
        (-math.log(2.0), 1.0 / 3.0, 2.0 / 3.0),
    ],
)
def test_offspring_params(x: float, p: float, q: float) -> None:
    assert offspring_params(x) == pytest.approx((p, q))


def test_offspring_params_keep_log_of_small_q() -> None:
    p, q = offspring_params(40.0)
    log_p, log_q = log_offspring_params(40.0)

    assert p == 1.0 - q
    assert q > 0.0
    assert log_q == pytest.approx(-40.0 - math.log1p(math.exp(-40.0)), rel=1e-14)
    assert log_p == pytest.approx(-math.exp(-40.0), rel=1e-10)


@pytest.mark.parametrize('x', [math.inf, -math.inf, math.nan])
def test_offspring_params_reject_non_finite(x: float) -> None:
    with pytest.raises(DomainError):
        offspring_params(x)
