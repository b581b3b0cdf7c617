import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.special import logsumexp

from bpire.asymptotics.engine import MonteCarloEngine, run_kernel
from bpire.asymptotics.series import WalkFunctionalKernel
from bpire.core.env import is_absolutely_continuous
from bpire.core.gfalgebra import log_clan_probs, log_no_survivor
from bpire.core.popsim import binomial_se, event_indicators, simulate_populations, surviving_clans
from bpire.core.walk import simulate_path, simulate_paths, sparre_andersen_prob
from bpire.errors import DomainError
from bpire.logger import logger
from bpire.schema.enums import ConventionEnum, WalkKindEnum
from bpire.schema.estimator import EstimatorResult, WalkParams
from bpire.schema.law import IncrementLaw
from bpire.schema.report import DecompositionReport, DecompositionRow, DualityReport, OracleCell, ZCheck
from bpire.utils.rng import StreamSpec

MAX_ORACLE_N = 16


@dataclass(frozen=True)
class TauEventKernel:
    """exp(lam S_r) on the event that the first minimum of S_0..S_n sits at r."""

    law: IncrementLaw
    n: int
    r: int
    lam: float = 0.0

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        sums = simulate_paths(self.law, self.n, size, rng)
        return np.where(sums.argmin(axis=1) == self.r, np.exp(self.lam * sums[:, self.r]), 0.0)


@dataclass(frozen=True)
class NegativeMaxKernel:
    law: IncrementLaw
    n: int

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        sums = simulate_paths(self.law, self.n, size, rng)
        return (sums[:, 1:].max(axis=1) < 0).astype(float)


def _z(left: float, right: float, se: float) -> float:
    if se > 0:
        return (left - right) / se
    return 0.0 if math.isclose(left, right, rel_tol=1e-12, abs_tol=1e-15) else math.inf


def _compare(name: str, left: EstimatorResult, right: EstimatorResult) -> ZCheck:
    se = math.hypot(left.stderr, right.stderr)
    return ZCheck(name=name, left=left.mean, right=right.mean, z=_z(left.mean, right.mean, se))


def _require_continuous(law: IncrementLaw) -> None:
    if not is_absolutely_continuous(law):
        raise DomainError(f'{law.family} law is not absolutely continuous, the first minimum is not a.s. unique')


def duality_check(
    law: IncrementLaw,
    n: int,
    reps: int,
    stream: StreamSpec,
    lam: float = 1.0,
    engine: MonteCarloEngine | None = None,
) -> DualityReport:
    """P(tau(n) = n) against P(M_n < 0) on independent streams, plus the split of the path at its minimum."""
    _require_continuous(law)
    if n < 1:
        raise DomainError(f'horizon must be positive, got n={n}')
    p_tau = run_kernel(TauEventKernel(law, n, n), stream.named('tau'), nsamples=reps, label='duality', engine=engine)
    p_max = run_kernel(NegativeMaxKernel(law, n), stream.named('max'), nsamples=reps, label='duality', engine=engine)
    main = _compare('tau_at_end_vs_negative_max', p_tau, p_max)

    checks = []
    tilted_tau = run_kernel(
        TauEventKernel(law, n, n, 1.0), stream.named('tilted_tau'), nsamples=reps, label='duality', engine=engine
    )
    tilted_max = run_kernel(
        WalkFunctionalKernel(law, n, WalkKindEnum.exp_pos_max, WalkParams()),
        stream.named('tilted_max'),
        nsamples=reps,
        label='duality',
        engine=engine,
    )
    checks.append(_compare('tilted_tau_at_end_vs_negative_max', tilted_tau, tilted_max))
    for r in sorted({n // 4, n // 2} & set(range(1, n))):
        for tilt in (0.0, lam):
            left = run_kernel(
                TauEventKernel(law, n, r, tilt),
                stream.named('split_left').child(r, int(tilt > 0)),
                nsamples=reps,
                label='duality',
                engine=engine,
            )
            head = run_kernel(
                TauEventKernel(law, r, r, tilt),
                stream.named('split_right').child(r, int(tilt > 0)),
                nsamples=reps,
                label='duality',
                engine=engine,
            )
            # P(L_{n-r} >= 0) не зависит от закона
            tail = sparre_andersen_prob(n - r)
            right = head.mean * tail
            se = math.hypot(left.stderr, head.stderr * tail)
            z = _z(left.mean, right, se)
            checks.append(ZCheck(name=f'split(r={r},lam={tilt})', left=left.mean, right=right, z=z))
    logger.info('Duality n=%d: P(tau=n)=%.5f P(M<0)=%.5f z=%.2f', n, p_tau.mean, p_max.mean, main.z)
    return DualityReport(n=n, p_tau=p_tau.mean, p_max=p_max.mean, z=main.z, factorization=checks)


def _oracle_horizon(n: int) -> None:
    if not 1 <= n <= MAX_ORACLE_N:
        raise DomainError(f'population oracle runs only for 1 <= n <= {MAX_ORACLE_N}, got n={n}')


def oracle_equivalence(
    law: IncrementLaw,
    n: int,
    env_samples: int,
    reps: int,
    stream: StreamSpec,
    conventions: Sequence[ConventionEnum] = (ConventionEnum.paper_corollary, ConventionEnum.strict),
) -> List[OracleCell]:
    """Closed-form clan probabilities against population frequencies on frozen environments."""
    _oracle_horizon(n)
    cells = []
    for index in range(env_samples):
        path = simulate_path(law, n, stream.named('env').child(index).generator())
        y_minus = simulate_populations(path, reps, stream.named('branch').child(index).generator())
        for convention in conventions:
            exact = np.exp(log_clan_probs(path.partial_sums, convention))
            for i in range(n):
                freq = float(event_indicators(y_minus, i, convention).mean())
                cells.append(
                    OracleCell(
                        path_index=index,
                        i=i,
                        convention=convention,
                        exact=float(exact[i]),
                        freq=freq,
                        se=binomial_se(freq, reps),
                        reps=reps,
                    )
                )
    return cells


def fraction_within(cells: Sequence[OracleCell], tolerance: float = 4.0) -> float:
    if not cells:
        return 1.0
    return sum(abs(cell.z) <= tolerance for cell in cells) / len(cells)


def decomposition_check(
    law: IncrementLaw, n: int, env_samples: int, branch_reps: int, stream: StreamSpec, tolerance: float = 4.0
) -> DecompositionReport:
    """Single-clan events, extinction of all clans and multi-clan survival exhaust the probability space."""
    _oracle_horizon(n)
    rows = []
    for index in range(env_samples):
        path = simulate_path(law, n, stream.named('env').child(index).generator())
        clan_sum = float(np.exp(log_clan_probs(path.partial_sums, ConventionEnum.strict)).sum())
        no_survivor = float(np.exp(log_no_survivor(path.partial_sums)))
        y_minus = simulate_populations(path, branch_reps, stream.named('branch').child(index).generator())
        multi = float((surviving_clans(y_minus) >= 2).mean())
        deviation = clan_sum + no_survivor + multi - 1.0
        # мультиклановая масса, которую предсказывают точные формулы
        null_se = binomial_se(min(max(1.0 - clan_sum - no_survivor, 0.0), 1.0), branch_reps)
        rows.append(
            DecompositionRow(
                path_index=index,
                clan_sum=clan_sum,
                no_survivor=no_survivor,
                multi_clan=multi,
                multi_clan_se=binomial_se(multi, branch_reps),
                deviation=deviation,
                z=_z(deviation, 0.0, null_se) if null_se > 0 else (0.0 if abs(deviation) < 1e-12 else math.inf),
            )
        )
    abs_z = [abs(row.z) for row in rows]
    report = DecompositionReport(
        n=n,
        rows=rows,
        max_abs_z=max(abs_z, default=0.0),
        fraction_within=sum(z <= tolerance for z in abs_z) / len(rows) if rows else 1.0,
        tolerance=tolerance,
    )
    logger.info('Decomposition n=%d: max |z|=%.2f, within=%.3f', n, report.max_abs_z, report.fraction_within)
    return report


def sparre_andersen_check(
    law: IncrementLaw, n: int, reps: int, stream: StreamSpec, engine: MonteCarloEngine | None = None
) -> ZCheck:
    _require_continuous(law)
    estimate = run_kernel(
        WalkFunctionalKernel(law, n, WalkKindEnum.prob_min_nonneg, WalkParams()),
        stream,
        nsamples=reps,
        label='sparre_andersen',
        engine=engine,
    )
    exact = sparre_andersen_prob(n)
    se = math.sqrt(exact * (1.0 - exact) / reps)
    return ZCheck(name=f'sparre_andersen(n={n})', left=estimate.mean, right=exact, z=_z(estimate.mean, exact, se))


def convention_relation_defect(law: IncrementLaw, n: int, paths: int, stream: StreamSpec) -> float:
    """max |log H_strict(i) + log(a_n + b_n) - log H_corollary(i) - log(a_n + b_n - b_1)| over i >= 1."""
    sums = simulate_paths(law, n, paths, stream.generator())
    if n < 2:
        return 0.0
    strict = log_clan_probs(sums, ConventionEnum.strict)[:, 1:]
    corollary = log_clan_probs(sums, ConventionEnum.paper_corollary)[:, 1:]
    t_0 = logsumexp(-sums, axis=1, keepdims=True)
    t_1 = logsumexp(-sums[:, 1:], axis=1, keepdims=True)
    return float(np.abs(strict + t_0 - corollary - t_1).max())


def decomposition_bound_excess(law: IncrementLaw, n: int, paths: int, stream: StreamSpec) -> float:
    """Largest log of sum_i H_strict(i) + P(no survivor) over sampled paths; never above 0 up to rounding."""
    sums = simulate_paths(law, n, paths, stream.generator())
    terms = np.concatenate(
        (log_clan_probs(sums, ConventionEnum.strict), log_no_survivor(sums)[:, None]),
        axis=1,
    )
    return float(logsumexp(terms, axis=1).max())
