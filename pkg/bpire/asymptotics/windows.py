"""Contributions to the reversed-representation mean by the location of the first maximum of S.

Under the time reversal the clan probability becomes a weight on the dual walk -S, whose first minimum is the first
maximum of S. Windows split [0, n] around j: [0, N), [N, j - N], (j - N, j), [j, j + N), [j + N, n].
"""
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from bpire.asymptotics.engine import MonteCarloEngine, run_kernel
from bpire.core.gfalgebra import log_reversed_weights
from bpire.core.walk import simulate_paths
from bpire.errors import DomainError
from bpire.logger import logger
from bpire.schema.enums import IntegrandEnum, WindowEnum
from bpire.schema.estimator import WindowResult
from bpire.schema.law import IncrementLaw
from bpire.utils.rng import StreamSpec

Span = Tuple[int, int]

PARTITION = (WindowEnum.head, WindowEnum.k1, WindowEnum.left_near, WindowEnum.right_near, WindowEnum.k2)


def window_spans(window: WindowEnum, j: int, n: int, N: int) -> List[Span]:
    """Closed index ranges covered by ``window``."""
    if window == WindowEnum.full and 1 <= j <= n:
        return [(0, n)]
    if not 1 <= j < n:
        raise DomainError(f'window centre j={j} outside [1, {n - 1}]')
    if not 1 <= N <= min(j // 2, n - j):
        raise DomainError(f'window width N={N} outside [1, {min(j // 2, n - j)}] for j={j}, n={n}')
    return {
        WindowEnum.head: [(0, N - 1)],
        WindowEnum.k1: [(N, j - N)],
        WindowEnum.left_near: [(j - N + 1, j - 1)],
        WindowEnum.right_near: [(j, j + N - 1)],
        WindowEnum.k2: [(j + N, n)],
        WindowEnum.k1_k2: [(N, j - N), (j + N, n)],
    }[window]


@dataclass(frozen=True)
class WindowKernel:
    law: IncrementLaw
    n: int
    j: int
    spans: Tuple[Span, ...]
    integrand: IntegrandEnum = IntegrandEnum.clan

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        sums = simulate_paths(self.law, self.n, size, rng)
        # первый минимум двойственного блуждания -S
        tau = sums.argmax(axis=1)
        inside = np.zeros(size, dtype=bool)
        for lo, hi in self.spans:
            inside |= (tau >= lo) & (tau <= hi)
        if self.integrand == IntegrandEnum.clan:
            values = np.exp(log_reversed_weights(sums, self.j))
        else:
            top_before = np.maximum.accumulate(sums, axis=1)
            values = np.exp(sums[:, self.j] - top_before[:, self.j - 1] - top_before[:, -1])
        return np.where(inside, values, 0.0)


def tau_window_contribution(
    law: IncrementLaw,
    j: int,
    n: int,
    window: WindowEnum,
    N: int,
    reps: int,
    stream: StreamSpec,
    integrand: IntegrandEnum = IntegrandEnum.clan,
    engine: MonteCarloEngine | None = None,
) -> WindowResult:
    window = WindowEnum(window)
    spans = window_spans(window, j, n, N)
    result = run_kernel(
        WindowKernel(law, n, j, tuple(spans), IntegrandEnum(integrand)),
        stream,
        nsamples=reps,
        label=f'window_{window.value}',
        engine=engine,
    )
    logger.debug('Window %s j=%d n=%d N=%d: %.6g', window.value, j, n, N, result.mean)
    return WindowResult(window=window, lo=spans[0][0], hi=spans[-1][1], result=result)


def tau_decomposition(
    law: IncrementLaw,
    j: int,
    n: int,
    N: int,
    reps: int,
    stream: StreamSpec,
    integrand: IntegrandEnum = IntegrandEnum.clan,
    engine: MonteCarloEngine | None = None,
) -> Dict[WindowEnum, WindowResult]:
    """The five windows and the full mean on one stream; the parts add up to the full mean."""
    parts = {
        window: tau_window_contribution(law, j, n, window, N, reps, stream, integrand, engine)
        for window in (*PARTITION, WindowEnum.k1_k2, WindowEnum.full)
    }
    full = parts[WindowEnum.full].result.mean
    if full > 0:
        logger.info(
            'Tau decomposition j=%d n=%d N=%d: far windows carry %.4f of the mean',
            j,
            n,
            N,
            parts[WindowEnum.k1_k2].result.mean / full,
        )
    return parts
