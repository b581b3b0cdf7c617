import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from bpire.core.env import sample_increments
from bpire.errors import DomainError
from bpire.schema.law import IncrementLaw
from bpire.utils.io import write_csv
from bpire.utils.logsumexp import LogSumExpAccumulator


@dataclass(frozen=True)
class WalkPath:
    increments: np.ndarray
    partial_sums: np.ndarray

    @property
    def n(self) -> int:
        return len(self.increments)

    @classmethod
    def from_increments(cls, increments: np.ndarray) -> 'WalkPath':
        increments = np.asarray(increments, dtype=float)
        partial_sums = np.concatenate(([0.0], np.cumsum(increments)))
        return cls(increments=increments, partial_sums=partial_sums)

    @classmethod
    def from_partial_sums(cls, partial_sums: np.ndarray) -> 'WalkPath':
        partial_sums = np.asarray(partial_sums, dtype=float)
        if partial_sums.ndim != 1 or len(partial_sums) == 0 or partial_sums[0] != 0.0:
            raise DomainError('partial sums must be a nonempty sequence starting at S_0 = 0')
        return cls(increments=np.diff(partial_sums), partial_sums=partial_sums)


@dataclass(frozen=True)
class PathSummary:
    running_min: np.ndarray
    running_max: np.ndarray
    tau_n: int

    @property
    def min_value(self) -> float:
        return float(self.running_min[-1])

    @property
    def max_value(self) -> float:
        return float(self.running_max[-1]) if len(self.running_max) else -math.inf


@dataclass(frozen=True)
class LogExpFunctional:
    log_a: float
    log_b: float

    @property
    def a(self) -> float:
        return math.exp(self.log_a)

    @property
    def b(self) -> float:
        return math.exp(self.log_b)


def simulate_paths(law: IncrementLaw, n: int, size: int, stream: np.random.Generator) -> np.ndarray:
    """Partial sums of ``size`` independent walks, shape ``(size, n + 1)`` with column 0 equal to S_0 = 0."""
    if n < 1:
        raise DomainError(f'walk horizon must be positive, got n={n}')
    increments = sample_increments(law, stream, (size, n))
    sums = np.zeros((size, n + 1))
    np.cumsum(increments, axis=1, out=sums[:, 1:])
    return sums


def simulate_path(law: IncrementLaw, n: int, stream: np.random.Generator) -> WalkPath:
    sums = simulate_paths(law, n, 1, stream)[0]
    return WalkPath(increments=np.diff(sums), partial_sums=sums)


def negate_path(path: WalkPath) -> WalkPath:
    return WalkPath(increments=-path.increments, partial_sums=-path.partial_sums)


def path_summary(path: WalkPath) -> PathSummary:
    sums = path.partial_sums
    # L_n учитывает S_0, M_n начинается с S_1
    return PathSummary(
        running_min=np.minimum.accumulate(sums),
        running_max=np.maximum.accumulate(sums[1:]),
        tau_n=int(np.argmin(sums)),
    )


def log_exp_functionals(path: WalkPath, i: int) -> LogExpFunctional:
    n = path.n
    if not 0 <= i <= n - 1:
        raise DomainError(f'index i={i} outside [0, {n - 1}]')
    sums = path.partial_sums
    acc = LogSumExpAccumulator().extend(sums[i] - sums[i:n])
    return LogExpFunctional(log_a=float(sums[i] - sums[n]), log_b=acc.value)


def sparre_andersen_prob(n: int) -> float:
    """P(L_n >= 0) = P(M_n < 0) = C(2n, n) 4^-n for every symmetric continuous increment law."""
    if n < 0:
        raise DomainError(f'n must be nonnegative, got {n}')
    return math.comb(2 * n, n) / 4**n


def path_to_csv(path: WalkPath, file: Path) -> Path:
    return write_csv(file, ('k', 'S_k'), ((k, float(s)) for k, s in enumerate(path.partial_sums)))
