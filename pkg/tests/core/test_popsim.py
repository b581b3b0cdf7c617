import numpy as np
import pytest

from tests.const import Z_TOLERANCE

from bpire.core.popsim import (
    ClanVector,
    clan_extinction_factorization,
    event_indicator,
    event_indicators,
    oracle_event_frequency,
    simulate_population,
    simulate_populations,
    step_generation,
    surviving_clans,
)
from bpire.core.walk import WalkPath
from bpire.errors import DomainError, PopulationOverflowError
from bpire.schema.enums import ConventionEnum
from bpire.utils.rng import StreamSpec


def test_founder_and_immigrant() -> None:
    clans = ClanVector.founder()

    assert clans.generation == 0
    assert clans.total == 1
    assert len(clans.y_minus) == 0


def test_extinct_clan_stays_extinct(rng: np.random.Generator) -> None:
    clans = ClanVector(generation=2, sizes=np.array([0, 0, 1], dtype=np.int64))
    for _ in range(10):
        clans = step_generation(clans, 0.0, rng)

    assert clans.sizes[0] == 0
    assert clans.sizes[1] == 0
    assert clans.generation == 12
    assert clans.sizes[-1] == 1


def test_critical_line_keeps_mean(stream: StreamSpec) -> None:
    path = WalkPath.from_increments(np.zeros(1))
    sizes = simulate_populations(path, 10**6, stream.generator())[:, 0]

    assert sizes.mean() == pytest.approx(1.0, abs=0.006)
    assert (sizes == 0).mean() == pytest.approx(0.5, abs=0.002)


def test_harsh_environment_kills_old_clans(stream: StreamSpec) -> None:
    path = WalkPath.from_increments(np.full(5, -30.0))
    y_minus = simulate_populations(path, 10**5, stream.generator())

    assert not y_minus[:, :4].any()


def test_line_mean_follows_environment(stream: StreamSpec) -> None:
    path = WalkPath.from_increments(np.array([0.4, -0.3, 0.5]))
    y_minus = simulate_populations(path, 2 * 10**5, stream.generator())

    for k in range(3):
        expected = np.exp(path.partial_sums[3] - path.partial_sums[k])
        column = y_minus[:, k]
        se = column.std(ddof=1) / np.sqrt(len(column))
        assert abs(column.mean() - expected) <= 5 * se


def test_simulate_population_matches_shape(rng: np.random.Generator) -> None:
    clans = simulate_population(WalkPath.from_increments(np.array([0.1, 0.2, -0.1])), rng)

    assert clans.generation == 3
    assert clans.sizes.shape == (4,)
    assert clans.y_minus.shape == (3,)


def test_population_overflow_is_reported(rng: np.random.Generator) -> None:
    with pytest.raises(PopulationOverflowError):
        simulate_populations(WalkPath.from_increments(np.array([800.0, 0.0])), 10, rng)


@pytest.mark.parametrize(
    ('sizes', 'i', 'strict', 'corollary'),
    [
        ([0, 0, 3, 0], 2, True, True),
        ([2, 0, 3, 0], 2, False, True),
        ([2, 0, 0, 0], 0, True, True),
        ([2, 1, 0, 0], 0, False, False),
        ([0, 0, 0, 0], 1, False, False),
        ([0, 0, 0, 0], 0, False, False),
    ],
)
def test_event_indicator(sizes: list, i: int, strict: bool, corollary: bool) -> None:
    clans = ClanVector(generation=4, sizes=np.array(sizes + [1], dtype=np.int64))

    assert event_indicator(clans, i, ConventionEnum.strict) is strict
    assert event_indicator(clans, i, ConventionEnum.paper_corollary) is corollary


def test_event_indicators_reject_index() -> None:
    with pytest.raises(DomainError):
        event_indicators(np.zeros((2, 4), dtype=np.int64), 4, ConventionEnum.strict)


def test_surviving_clans() -> None:
    counts = surviving_clans(np.array([[0, 1, 2], [0, 0, 0], [5, 5, 5]]))

    assert counts.tolist() == [2, 0, 3]


def test_oracle_single_generation(stream: StreamSpec) -> None:
    path = WalkPath.from_increments(np.zeros(1))
    freq, se = oracle_event_frequency(path, 0, ConventionEnum.strict, 10**6, stream.generator())

    assert abs(freq - 0.5) <= Z_TOLERANCE * 0.0005
    assert se == pytest.approx(0.0005, rel=0.01)


def test_oracle_flat_path(stream: StreamSpec) -> None:
    path = WalkPath.from_increments(np.zeros(4))
    freq, _ = oracle_event_frequency(path, 2, ConventionEnum.strict, 10**6, stream.generator())

    assert abs(freq - 0.1) <= Z_TOLERANCE * np.sqrt(0.1 * 0.9 / 10**6)


def test_oracle_single_replicate(rng: np.random.Generator) -> None:
    freq, se = oracle_event_frequency(WalkPath.from_increments(np.zeros(2)), 0, ConventionEnum.strict, 1, rng)

    assert freq in (0.0, 1.0)
    assert se == 0.0


def test_clans_go_extinct_independently(stream: StreamSpec) -> None:
    path = WalkPath.from_increments(np.array([0.3, -0.5, 0.2, 0.1, -0.2, 0.4]))
    check = clan_extinction_factorization(path, 1, 3, 10**5, stream.generator())

    assert abs(check.z) <= Z_TOLERANCE


def test_factorization_needs_distinct_clans(rng: np.random.Generator) -> None:
    with pytest.raises(DomainError):
        clan_extinction_factorization(WalkPath.from_increments(np.zeros(3)), 1, 1, 10, rng)
