import numpy as np
import pytest

from tests.const import SEED

from bpire.errors import DomainError
from bpire.utils.rng import MASK_64b, StreamSpec, stream_tag


def test_children_are_independent_of_creation_order() -> None:
    root = StreamSpec(SEED)
    late = root.child(3).child(1).generator().random(8)
    root.child(0).generator().random(100)

    assert np.array_equal(StreamSpec(SEED, (3, 1)).generator().random(8), late)


def test_distinct_keys_give_distinct_streams() -> None:
    root = StreamSpec(SEED)

    assert not np.array_equal(root.child(1).generator().random(8), root.child(2).generator().random(8))
    assert not np.array_equal(root.named('U').generator().random(8), root.named('V').generator().random(8))


def test_named_streams_use_stable_tags() -> None:
    assert StreamSpec(SEED).named('reversed').key == (stream_tag('reversed'),)
    assert stream_tag('reversed') == stream_tag('reversed')


@pytest.mark.parametrize('seed', [-1, MASK_64b + 1])
def test_seed_must_fit_64_bits(seed: int) -> None:
    with pytest.raises(DomainError):
        StreamSpec(seed)


def test_largest_seed_is_accepted() -> None:
    assert StreamSpec(MASK_64b).generator().random() < 1.0
