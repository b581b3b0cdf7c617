import numpy as np
import pytest

from bpire.utils.reduce import BatchMoments, chunk_sizes, merge_moments, pairwise_reduce


@pytest.mark.parametrize(
    ('total', 'chunk', 'expected'),
    [
        (10, 4, [(0, 4), (1, 4), (2, 2)]),
        (3, 8, [(0, 3)]),
        (0, 8, []),
    ],
)
def test_chunk_sizes(total: int, chunk: int, expected: list) -> None:
    assert list(chunk_sizes(total, chunk)) == expected


def test_pairwise_reduce_keeps_order() -> None:
    assert pairwise_reduce(list('abcde'), lambda a, b: f'({a}{b})') == '(((ab)(cd))e)'

    with pytest.raises(ValueError):
        pairwise_reduce([], lambda a, b: a)


def test_merged_moments_match_pooled(rng: np.random.Generator) -> None:
    values = rng.exponential(size=1000)
    merged = merge_moments([BatchMoments.from_values(part) for part in np.array_split(values, 7)])

    assert merged.count == 1000
    assert merged.mean == pytest.approx(values.mean(), rel=1e-12)
    assert merged.variance == pytest.approx(values.var(ddof=1), rel=1e-10)
    assert merged.stderr == pytest.approx(values.std(ddof=1) / np.sqrt(1000), rel=1e-10)


def test_empty_batch_is_neutral() -> None:
    batch = BatchMoments.from_values(np.array([1.0, 3.0]))

    assert batch.merge(BatchMoments.from_values(np.array([]))) == batch
    assert BatchMoments(0, 0.0, 0.0).merge(batch) == batch


def test_constant_values_have_no_spread() -> None:
    batch = BatchMoments.from_values(np.full(10, 0.125))

    assert batch.mean == 0.125
    assert batch.stderr == 0.0
