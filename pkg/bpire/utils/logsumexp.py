import math
from typing import Iterable

import numpy as np


class LogSumExpAccumulator:
    """Streaming log(sum(exp(v))) with a running maximum and a Neumaier-compensated scaled sum."""

    def __init__(self) -> None:
        self.max = -math.inf
        self._sum = 0.0
        self._comp = 0.0
        self.count = 0

    def add(self, value: float) -> None:
        if value == -math.inf:
            return
        if math.isnan(value) or value == math.inf:
            raise ValueError(f'log-sum-exp term must be finite or -inf, got {value}')
        if value > self.max:
            scale = math.exp(self.max - value) if self.max > -math.inf else 0.0
            self._sum *= scale
            self._comp *= scale
            self.max = value
        term = math.exp(value - self.max)
        total = self._sum + term
        if abs(self._sum) >= term:
            self._comp += (self._sum - total) + term
        else:
            self._comp += (term - total) + self._sum
        self._sum = total
        self.count += 1

    def extend(self, values: Iterable[float]) -> 'LogSumExpAccumulator':
        for value in values:
            self.add(float(value))
        return self

    @property
    def value(self) -> float:
        if self.max == -math.inf:
            return -math.inf
        return self.max + math.log(self._sum + self._comp)


def log_suffix_sum_exp(values: np.ndarray, axis: int = -1) -> np.ndarray:
    flipped = np.flip(values, axis=axis)
    return np.flip(np.logaddexp.accumulate(flipped, axis=axis), axis=axis)
