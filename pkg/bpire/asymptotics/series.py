import math
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy.special import log_expit, logsumexp

from bpire.asymptotics.engine import MonteCarloEngine, run_kernel
from bpire.asymptotics.estimators import estimate_event_prob, estimate_event_prob_reversed
from bpire.core.env import is_absolutely_continuous, law_mgf
from bpire.core.gfalgebra import log_survival
from bpire.core.walk import simulate_paths, sparre_andersen_prob
from bpire.errors import DomainError
from bpire.logger import logger
from bpire.schema.enums import ConventionEnum, EstimatorEnum, WalkKindEnum
from bpire.schema.estimator import EstimatorResult, ScalingSeries, SeriesRow, WalkParams
from bpire.schema.law import IncrementLaw
from bpire.schema.regime import FixedGapRegime, FixedIRegime, ProportionalRegime, RegimeBase
from bpire.utils.rng import StreamSpec

LogTransform = Callable[[np.ndarray], np.ndarray]


def _log_identity(log_y: np.ndarray) -> np.ndarray:
    return log_y


def _log_sqrt(log_y: np.ndarray) -> np.ndarray:
    return 0.5 * log_y


def _log_one(log_y: np.ndarray) -> np.ndarray:
    return np.zeros_like(log_y)


def _log_inv_one_plus(log_y: np.ndarray) -> np.ndarray:
    return log_expit(-log_y)


def _log_inv_one_plus_sq(log_y: np.ndarray) -> np.ndarray:
    return 2.0 * log_expit(-log_y)


@dataclass(frozen=True)
class Transform:
    log_fn: LogTransform
    exponent: float
    holder: float = 1.0


# g(y) <= C y^alpha
G_TRANSFORMS: Dict[str, Transform] = {
    'identity': Transform(_log_identity, exponent=1.0),
    'sqrt': Transform(_log_sqrt, exponent=0.5),
    'one': Transform(_log_one, exponent=0.0),
}

# h(y) <= C (1 + y)^-beta, |h(y1) - h(y2)| <= C |y1 - y2|^eps
H_TRANSFORMS: Dict[str, Transform] = {
    'inv_one_plus': Transform(_log_inv_one_plus, exponent=1.0, holder=1.0),
    'inv_one_plus_sq': Transform(_log_inv_one_plus_sq, exponent=2.0, holder=1.0),
}


@dataclass(frozen=True)
class GuivarchFunctional:
    """E[g(Y_n) h(L_n)] with Y_n = prod e^{X_k} = e^{S_n} and L_n = sum_{k<=n} Y_k."""

    g: str = 'identity'
    h: str = 'inv_one_plus'

    def __post_init__(self) -> None:
        if self.g not in G_TRANSFORMS:
            raise DomainError(f'unknown g transform {self.g!r}, registered: {sorted(G_TRANSFORMS)}')
        if self.h not in H_TRANSFORMS:
            raise DomainError(f'unknown h transform {self.h!r}, registered: {sorted(H_TRANSFORMS)}')

    @property
    def alpha(self) -> float:
        return G_TRANSFORMS[self.g].exponent

    @property
    def beta(self) -> float:
        return H_TRANSFORMS[self.h].exponent

    @property
    def eps(self) -> float:
        return H_TRANSFORMS[self.h].holder

    @property
    def expected_slope(self) -> float:
        # g = 1 даёт второе утверждение: n^{1/2} E[h(L_n)]
        return -0.5 if self.g == 'one' else -1.5

    def validate(self, law: IncrementLaw) -> None:
        if not math.isfinite(law_mgf(law, self.alpha)) or not math.isfinite(law_mgf(law, -self.eps)):
            raise DomainError(
                f'{law.family} law lacks E[e^({self.alpha} X)] or E[e^(-{self.eps} X)], '
                f'required by g={self.g}, h={self.h}'
            )

    def log_value(self, sums: np.ndarray) -> np.ndarray:
        log_upsilon = sums[:, -1]
        log_lambda = logsumexp(sums[:, 1:], axis=1)
        return G_TRANSFORMS[self.g].log_fn(log_upsilon) + H_TRANSFORMS[self.h].log_fn(log_lambda)


def _tau_first_min(sums: np.ndarray) -> np.ndarray:
    return sums.argmin(axis=1)


@dataclass(frozen=True)
class WalkFunctionalKernel:
    law: IncrementLaw
    n: int
    kind: WalkKindEnum
    params: WalkParams

    def _tilted_tau_given_head(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Conditional mean given X_1..X_r: after r the walk stays at or above S_r with probability C(2m, m) 4^-m."""
        r = self.params.tilt_index(self.n)
        tail = sparre_andersen_prob(self.n - r)
        if r == 0:
            return np.full(size, tail)
        head = simulate_paths(self.law, r, size, rng)
        return np.where(head.argmin(axis=1) == r, np.exp(self.params.lam * head[:, -1]) * tail, 0.0)

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == WalkKindEnum.tilted_tau and is_absolutely_continuous(self.law):
            return self._tilted_tau_given_head(rng, size)
        sums = simulate_paths(self.law, self.n, size, rng)
        s_n = sums[:, -1]
        match self.kind:
            case WalkKindEnum.prob_min_nonneg:
                return (sums.min(axis=1) >= 0).astype(float)
            case WalkKindEnum.exp_neg_min:
                return np.where(sums.min(axis=1) >= 0, np.exp(-s_n), 0.0)
            case WalkKindEnum.exp_pos_max:
                return np.where(sums[:, 1:].max(axis=1) < 0, np.exp(s_n), 0.0)
            case WalkKindEnum.tilted_tau:
                r = self.params.tilt_index(self.n)
                return np.where(_tau_first_min(sums) == r, np.exp(self.params.lam * sums[:, r]), 0.0)
            case WalkKindEnum.guivarch:
                return np.exp(GuivarchFunctional(self.params.g, self.params.h).log_value(sums))
            case WalkKindEnum.psi:
                log_t = -math.log1p(-self.params.s)
                if self.n == 1:
                    return np.ones(size)
                # t / (t + sum_{k=1}^{n-1} e^{-S_k}), t = 1/(1 - s)
                return np.exp(log_expit(log_t - logsumexp(-sums[:, 1:-1], axis=1)))
            case WalkKindEnum.t_of_x:
                log_lambda = logsumexp(-sums[:, 1:], axis=1)
                log_den = np.logaddexp(0.0, log_lambda) + np.logaddexp(math.log1p(self.params.x), log_lambda)
                return np.exp(-s_n - log_den)
            case WalkKindEnum.bpre_survival:
                return np.exp(log_survival(sums))
        raise DomainError(f'unknown walk functional kind {self.kind!r}')


EXPECTED_WALK_SLOPES: Dict[WalkKindEnum, float] = {
    WalkKindEnum.prob_min_nonneg: -0.5,
    WalkKindEnum.exp_neg_min: -1.5,
    WalkKindEnum.exp_pos_max: -1.5,
    WalkKindEnum.tilted_tau: -2.0,
    WalkKindEnum.psi: -0.5,
    WalkKindEnum.t_of_x: -1.5,
    WalkKindEnum.bpre_survival: -0.5,
}


def _check_grid(n_grid: Sequence[int], smallest: int) -> None:
    if len(n_grid) == 0:
        raise DomainError('n grid is empty')
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise DomainError(f'n grid must be strictly increasing, got {list(n_grid)}')
    if n_grid[0] < smallest:
        raise DomainError(f'n grid must start at n >= {smallest}, got {n_grid[0]}')


def _check_walk_params(law: IncrementLaw, kind: WalkKindEnum, params: WalkParams, n_grid: Sequence[int]) -> None:
    if kind == WalkKindEnum.guivarch:
        GuivarchFunctional(params.g, params.h).validate(law)
    if kind == WalkKindEnum.tilted_tau:
        for n in n_grid:
            r = params.tilt_index(n)
            if not 0 <= r <= n:
                raise DomainError(f'tilt index r={r} outside [0, {n}]')


def scaling_sweep(
    law: IncrementLaw,
    regime: RegimeBase,
    n_grid: Sequence[int],
    stream: StreamSpec,
    nsamples: int | None = None,
    rel_se_goal: float | None = None,
    convention: ConventionEnum = ConventionEnum.paper_corollary,
    estimator: EstimatorEnum = EstimatorEnum.direct,
    engine: MonteCarloEngine | None = None,
) -> ScalingSeries:
    """One estimate per n on the sub-stream ``stream.child(n)``; the whole grid is checked before any sampling."""
    _check_grid(n_grid, 2)
    if isinstance(regime, ProportionalRegime) and not is_absolutely_continuous(law):
        raise DomainError(f'{law.family} law has no density, the proportional regime needs one')
    used = [regime.check(n) for n in n_grid]
    rows = []
    for n, i in zip(n_grid, used):
        result: EstimatorResult
        if estimator == EstimatorEnum.reversed:
            result = estimate_event_prob_reversed(law, regime, n, stream.child(n), nsamples, rel_se_goal, engine)
        else:
            result = estimate_event_prob(law, regime, n, stream.child(n), nsamples, rel_se_goal, convention, engine)
        logger.info('Sweep %s n=%d i=%d: %.6g +- %.2g', regime.label, n, i, result.mean, result.stderr)
        rows.append(_row(n, i, result))
    return ScalingSeries(label=f'{estimator.value}:{regime.label}', regime=regime, rows=rows)


def walk_functional_series(
    law: IncrementLaw,
    kind: WalkKindEnum,
    n_grid: Sequence[int],
    reps: int,
    stream: StreamSpec,
    params: WalkParams | None = None,
    engine: MonteCarloEngine | None = None,
) -> ScalingSeries:
    kind = WalkKindEnum(kind)
    params = params or WalkParams()
    _check_grid(n_grid, 1)
    _check_walk_params(law, kind, params, n_grid)
    rows = []
    for n in n_grid:
        result = run_kernel(
            WalkFunctionalKernel(law, n, kind, params), stream.child(n), nsamples=reps, label=kind.value, engine=engine
        )
        i_used = params.tilt_index(n) if kind == WalkKindEnum.tilted_tau else None
        logger.info('Walk series %s n=%d: %.6g +- %.2g', kind.value, n, result.mean, result.stderr)
        rows.append(_row(n, i_used, result))
    return ScalingSeries(label=kind.value, rows=rows)


def _row(n: int, i_used: int | None, result: EstimatorResult) -> SeriesRow:
    return SeriesRow(
        n=n,
        i_used=i_used,
        estimate=result.mean,
        stderr=result.stderr,
        nsamples=result.nsamples,
        seed=result.master_seed,
        budget_exceeded=result.budget_exceeded,
    )


def regime_scaling(regime: RegimeBase) -> Tuple[float, float, float]:
    """Expected log-log slope and the powers (a, b) making i^a (n - i)^b P(only clan i survives) settle."""
    match regime:
        case FixedIRegime():
            return -1.5, 0.0, 1.5
        case FixedGapRegime():
            return -0.5, 0.5, 0.0
        case ProportionalRegime():
            return -2.0, 0.5, 1.5
    raise DomainError(f'unknown regime {regime!r}')


def walk_scaling(kind: WalkKindEnum, params: WalkParams) -> Tuple[float, float, float]:
    if kind == WalkKindEnum.guivarch:
        slope = GuivarchFunctional(params.g, params.h).expected_slope
    else:
        slope = EXPECTED_WALK_SLOPES[kind]
    if kind == WalkKindEnum.tilted_tau:
        # r^{3/2} (n - r)^{1/2}
        return slope, 1.5, 0.5
    return slope, 0.0, -slope
