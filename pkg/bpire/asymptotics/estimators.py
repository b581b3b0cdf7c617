"""Estimators of P(only clan i survives at n) averaged over the environment.

The direct estimator averages the closed-form clan probability over simulated environments (the exact
conditional expectation of the event indicator), the reversed one averages the time-reversed weight at j = n - i.
Both kernels draw the environment first, so on a common stream they see the same paths.
"""
from dataclasses import dataclass

import numpy as np

from bpire.asymptotics.engine import MonteCarloEngine, run_kernel
from bpire.core.gfalgebra import log_clan_prob_at, log_reversed_weights
from bpire.core.walk import simulate_paths
from bpire.errors import DomainError
from bpire.logger import logger
from bpire.schema.enums import ConventionEnum
from bpire.schema.estimator import EstimatorResult
from bpire.schema.law import IncrementLaw
from bpire.schema.regime import RegimeBase
from bpire.utils.rng import StreamSpec


@dataclass(frozen=True)
class ClanProbKernel:
    law: IncrementLaw
    n: int
    i: int
    convention: ConventionEnum = ConventionEnum.paper_corollary

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        sums = simulate_paths(self.law, self.n, size, rng)
        return np.exp(log_clan_prob_at(sums, self.i, self.convention))


@dataclass(frozen=True)
class ReversedWeightKernel:
    law: IncrementLaw
    n: int
    j: int

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        sums = simulate_paths(self.law, self.n, size, rng)
        return np.exp(log_reversed_weights(sums, self.j))


def _clan_index(regime: RegimeBase, n: int) -> int:
    if n < 1:
        raise DomainError(f'horizon must be positive, got n={n}')
    return regime.check(n)


def estimate_event_prob(
    law: IncrementLaw,
    regime: RegimeBase,
    n: int,
    stream: StreamSpec,
    nsamples: int | None = None,
    rel_se_goal: float | None = None,
    convention: ConventionEnum = ConventionEnum.paper_corollary,
    engine: MonteCarloEngine | None = None,
) -> EstimatorResult:
    i = _clan_index(regime, n)
    result = run_kernel(
        ClanProbKernel(law, n, i, convention), stream, nsamples, rel_se_goal, label='direct', engine=engine
    )
    logger.debug('Direct estimate n=%d i=%d: %.6g +- %.2g', n, i, result.mean, result.stderr)
    return result


def estimate_event_prob_reversed(
    law: IncrementLaw,
    regime: RegimeBase,
    n: int,
    stream: StreamSpec,
    nsamples: int | None = None,
    rel_se_goal: float | None = None,
    engine: MonteCarloEngine | None = None,
) -> EstimatorResult:
    j = n - _clan_index(regime, n)
    result = run_kernel(
        ReversedWeightKernel(law, n, j), stream, nsamples, rel_se_goal, label='reversed', engine=engine
    )
    logger.debug('Reversed estimate n=%d j=%d: %.6g +- %.2g', n, j, result.mean, result.stderr)
    return result
