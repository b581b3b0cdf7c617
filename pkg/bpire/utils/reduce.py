import math
from dataclasses import dataclass
from typing import Callable, Iterator, List, Sequence, Tuple, TypeVar

import numpy as np

T = TypeVar('T')


def pairwise_reduce(items: Sequence[T], op: Callable[[T, T], T]) -> T:
    """Fixed binary tree over the item order: the result depends only on the sequence, never on scheduling."""
    if not items:
        raise ValueError('nothing to reduce')
    level: List[T] = list(items)
    while len(level) > 1:
        paired = [op(level[k], level[k + 1]) for k in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


def chunk_sizes(total: int, chunk: int) -> Iterator[Tuple[int, int]]:
    """(index, size) pairs covering ``total`` items in chunks of at most ``chunk``."""
    if chunk < 1:
        raise ValueError(f'chunk must be positive, got {chunk}')
    for index, start in enumerate(range(0, total, chunk)):
        yield index, min(chunk, total - start)


@dataclass(frozen=True)
class BatchMoments:
    count: int
    total: float
    m2: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> 'BatchMoments':
        values = np.asarray(values, dtype=float).ravel()
        if not len(values):
            return cls(0, 0.0, 0.0)
        total = float(values.sum())
        mean = total / len(values)
        return cls(len(values), total, float(((values - mean) ** 2).sum()))

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else math.nan

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else math.nan

    def merge(self, other: 'BatchMoments') -> 'BatchMoments':
        if not self.count:
            return other
        if not other.count:
            return self
        count = self.count + other.count
        delta = other.mean - self.mean
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return BatchMoments(count, self.total + other.total, m2)


def merge_moments(batches: Sequence[BatchMoments]) -> BatchMoments:
    return pairwise_reduce(batches, BatchMoments.merge)
