"""Renewal functions U, V of the killed walk and expectations under the conditioned laws P+ and P-.

U(x) = 1 + sum_n P(S_n >= -x, M_n < 0) and V(x) = 1 + sum_n P(S_n < -x, L_n >= 0) are estimated by counting
visits during the first excursion below (above) zero. Everything under P+ is obtained by reweighting plain paths
with U, never by sampling the conditioned walk.
"""
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from bpire.core.env import is_absolutely_continuous, sample_increments
from bpire.core.walk import simulate_paths
from bpire.errors import DomainError, NoSampleError
from bpire.logger import logger
from bpire.schema.enums import ConditionEnum, FunctionalEnum, RenewalSideEnum
from bpire.schema.law import IncrementLaw
from bpire.schema.report import ConditionalEstimate, HarmonicityRow, TiltedMeasureSpec, ZCheck
from bpire.utils.io import write_csv
from bpire.utils.reduce import BatchMoments, chunk_sizes, merge_moments
from bpire.utils.rng import StreamSpec
from conf.config import settings

STEP_BLOCK = 256
# partial sums held in memory per chunk of paths
PATH_CELLS = 2**22

PathFunctional = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RenewalTable:
    """Grid ordered by increasing |x|; the V grid therefore runs 0, -0.5, -1, ..."""

    side: RenewalSideEnum
    grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    cap: int
    paths: int
    seed: int
    truncated_fraction: float

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.grid)

    def in_domain(self, x: float) -> bool:
        return x >= 0 if self.side == RenewalSideEnum.U else x <= 0

    def _interp(self, column: np.ndarray, x: float | np.ndarray) -> np.ndarray:
        m = np.abs(np.asarray(x, dtype=float))
        mags = self.magnitudes
        out = np.interp(m, mags, column)
        if len(mags) >= 2:
            # U и V асимптотически линейны
            slope = (column[-1] - column[-2]) / (mags[-1] - mags[-2])
            out = np.where(m > mags[-1], column[-1] + slope * (m - mags[-1]), out)
        return out

    def at(self, x: float | np.ndarray) -> np.ndarray:
        return self._interp(self.values, x)

    def stderr_at(self, x: float | np.ndarray) -> np.ndarray:
        return self._interp(self.stderr, x)

    def to_csv(self, file: Path) -> Path:
        return write_csv(
            file,
            ('x', 'value', 'stderr'),
            zip(self.grid.tolist(), self.values.tolist(), self.stderr.tolist()),
            comments=(f'cap={self.cap},paths={self.paths},seed={self.seed}',),
        )


def _paths_per_chunk(n: int) -> int:
    return max(1, min(settings.BATCH_SIZE, PATH_CELLS // (n + 1)))


def _renewal_grid(x_grid: Sequence[float], side: RenewalSideEnum) -> np.ndarray:
    grid = np.asarray(x_grid, dtype=float)
    if grid.ndim != 1 or not len(grid):
        raise DomainError('renewal grid must be a nonempty sequence')
    if not np.all(np.isfinite(grid)):
        raise DomainError('renewal grid must be finite')
    if side == RenewalSideEnum.U and np.any(grid < 0):
        raise DomainError('U grid must lie in [0, inf)')
    if side == RenewalSideEnum.V and np.any(grid > 0):
        raise DomainError('V grid must lie in (-inf, 0]')
    grid = grid[np.argsort(np.abs(grid), kind='stable')]
    if np.any(np.diff(np.abs(grid)) == 0):
        raise DomainError('renewal grid has duplicate points')
    return grid


def _excursion_counts(
    law: IncrementLaw, mags: np.ndarray, side: RenewalSideEnum, size: int, cap: int, rng: np.random.Generator
) -> Tuple[np.ndarray, int]:
    """Visit counts per grid point during the first excursion, walkers advanced in lockstep blocks."""
    width = len(mags) + 1
    counts = np.zeros(size * width, dtype=np.int64)
    level = np.zeros(size)
    active = np.arange(size)
    steps = 0
    while active.size and steps < cap:
        block = min(STEP_BLOCK, cap - steps)
        walk = level[active, None] + np.cumsum(sample_increments(law, rng, (active.size, block)), axis=1)
        if side == RenewalSideEnum.U:
            exited, visits, how = walk >= 0, -walk, 'left'
        else:
            exited, visits, how = walk < 0, walk, 'right'
        hit = exited.any(axis=1)
        first = np.where(hit, exited.argmax(axis=1), block)
        live = np.arange(block)[None, :] < first[:, None]
        cells = np.searchsorted(mags, visits[live], side=how)
        rows = np.broadcast_to(active[:, None], walk.shape)[live]
        counts += np.bincount(rows * width + cells, minlength=size * width)
        level[active] = walk[:, -1]
        active = active[~hit]
        steps += block
    per_path = np.cumsum(counts.reshape(size, width)[:, :-1], axis=1)
    return per_path, int(active.size)


def _estimate_renewal(
    law: IncrementLaw, x_grid: Sequence[float], paths: int, cap: int, stream: StreamSpec, side: RenewalSideEnum
) -> RenewalTable:
    grid = _renewal_grid(x_grid, side)
    if paths < 1 or cap < 1:
        raise DomainError(f'paths and cap must be positive, got paths={paths}, cap={cap}')
    mags = np.abs(grid)
    chunks, truncated = [], 0
    for index, size in chunk_sizes(paths, settings.BATCH_SIZE):
        counts, cut = _excursion_counts(law, mags, side, size, cap, stream.child(index).generator())
        chunks.append(counts)
        truncated += cut
    counts = np.concatenate(chunks)
    values = 1.0 + counts.mean(axis=0)
    stderr = counts.std(axis=0, ddof=1) / math.sqrt(paths) if paths > 1 else np.zeros(len(grid))
    truncated_fraction = truncated / paths
    if truncated_fraction > 0.01:
        logger.warning('Renewal %s: %.2f%% of paths hit the cap %d', side.value, 100 * truncated_fraction, cap)
    logger.info('Renewal %s estimated on %d paths, cap=%d', side.value, paths, cap)
    return RenewalTable(
        side=side,
        grid=grid,
        values=values,
        stderr=stderr,
        cap=cap,
        paths=paths,
        seed=stream.master_seed,
        truncated_fraction=truncated_fraction,
    )


def estimate_U(law: IncrementLaw, x_grid: Sequence[float], paths: int, cap: int, stream: StreamSpec) -> RenewalTable:
    return _estimate_renewal(law, x_grid, paths, cap, stream, RenewalSideEnum.U)


def estimate_V(law: IncrementLaw, x_grid: Sequence[float], paths: int, cap: int, stream: StreamSpec) -> RenewalTable:
    return _estimate_renewal(law, x_grid, paths, cap, stream, RenewalSideEnum.V)


def harmonicity_residual(
    law: IncrementLaw, table: RenewalTable, x: float, reps: int, stream: StreamSpec
) -> HarmonicityRow:
    """E[U(x + X); x + X >= 0] - U(x) for U, E[V(x + X); x + X < 0] - V(x) for V.

    Table errors at different points come from the same excursions, so E[se(x + X); keep] + se(x) bounds
    the error the table contributes to the residual.
    """
    if reps < 1:
        raise DomainError(f'reps must be positive, got {reps}')
    if not table.in_domain(x):
        raise DomainError(f'x={x} outside the domain of {table.side.value}')
    batches = []
    table_se = 0.0
    for index, size in chunk_sizes(reps, settings.BATCH_SIZE):
        y = x + sample_increments(law, stream.child(index).generator(), size)
        keep = y >= 0 if table.side == RenewalSideEnum.U else y < 0
        batches.append(BatchMoments.from_values(np.where(keep, table.at(y), 0.0)))
        table_se += float(np.where(keep, table.stderr_at(y), 0.0).sum())
    moments = merge_moments(batches)
    return HarmonicityRow(
        side=table.side,
        x=x,
        residual=moments.mean - float(table.at(x)),
        se=moments.stderr,
        table_se=table_se / reps + float(table.stderr_at(x)),
    )


def _one(sums: np.ndarray) -> np.ndarray:
    return np.ones(sums.shape[0])


def _exp_neg_final(sums: np.ndarray) -> np.ndarray:
    return np.exp(-sums[:, -1])


def _inv_one_plus_sum(sums: np.ndarray) -> np.ndarray:
    if sums.shape[1] == 1:
        return np.ones(sums.shape[0])
    # 1 / (1 + sum_{k=1}^{n} e^{-S_k})
    return expit(-logsumexp(-sums[:, 1:], axis=1))


FUNCTIONALS: Dict[FunctionalEnum, PathFunctional] = {
    FunctionalEnum.one: _one,
    FunctionalEnum.exp_neg_final: _exp_neg_final,
    FunctionalEnum.inv_one_plus_sum: _inv_one_plus_sum,
}


def resolve_functional(functional: FunctionalEnum | str | PathFunctional) -> PathFunctional:
    if callable(functional):
        return functional
    try:
        return FUNCTIONALS[FunctionalEnum(functional)]
    except ValueError as e:
        raise DomainError(f'unknown path functional {functional!r}') from e


def plus_measure_expectation(
    law: IncrementLaw,
    functional: FunctionalEnum | str | PathFunctional,
    n: int,
    x: float,
    reps: int,
    table_U: RenewalTable,
    stream: StreamSpec,
) -> Tuple[float, float]:
    """E_x^+[O_n] = E_x[O_n U(S_n); L_n >= 0] / U(x), the functional evaluated on the walk started at x."""
    evaluate = resolve_functional(functional)
    if table_U.side != RenewalSideEnum.U:
        raise DomainError('plus measure needs a U table')
    if x < 0:
        raise DomainError(f'start point must be nonnegative, got x={x}')
    if reps < 1:
        raise DomainError(f'reps must be positive, got {reps}')
    if n == 0:
        return float(evaluate(np.full((1, 1), float(x)))[0]), 0.0
    u_x = float(table_U.at(x))
    batches = []
    for index, size in chunk_sizes(reps, _paths_per_chunk(n)):
        sums = x + simulate_paths(law, n, size, stream.child(index).generator())
        weight = np.where(sums.min(axis=1) >= 0, table_U.at(np.maximum(sums[:, -1], 0.0)), 0.0) / u_x
        batches.append(BatchMoments.from_values(evaluate(sums) * weight))
    moments = merge_moments(batches)
    return moments.mean, moments.stderr


def _acceptance(sums: np.ndarray, condition: ConditionEnum, x: float, r: int | None) -> np.ndarray:
    match condition:
        case ConditionEnum.min_above:
            return sums.min(axis=1) >= -x
        case ConditionEnum.max_below:
            return sums[:, 1:].max(axis=1) < -x
        case ConditionEnum.tau_at:
            return sums.argmin(axis=1) == r
    raise DomainError(f'unknown condition {condition!r}')


def conditional_expectation(
    law: IncrementLaw,
    functional: FunctionalEnum | str | PathFunctional,
    condition: ConditionEnum,
    n: int,
    reps: int,
    stream: StreamSpec,
    x: float = 0.0,
    r: int | None = None,
) -> ConditionalEstimate:
    """Rejection estimate of E[O_n | condition] with the acceptance rate reported alongside."""
    evaluate = resolve_functional(functional)
    condition = ConditionEnum(condition)
    if x < 0:
        raise DomainError(f'level x must be nonnegative, got {x}')
    if reps < 1:
        raise DomainError(f'reps must be positive, got {reps}')
    if condition == ConditionEnum.tau_at:
        if r is None or not 0 <= r <= n:
            raise DomainError(f'tau condition needs r in [0, {n}], got {r}')
        if not is_absolutely_continuous(law):
            raise DomainError(f'{law.family} law has ties, the first-minimum condition is refused')
    batches = []
    accepted = 0
    for index, size in chunk_sizes(reps, _paths_per_chunk(n)):
        sums = simulate_paths(law, n, size, stream.child(index).generator())
        keep = _acceptance(sums, condition, x, r)
        accepted += int(keep.sum())
        batches.append(BatchMoments.from_values(evaluate(sums[keep])))
    if not accepted:
        raise NoSampleError(f'no path out of {reps} satisfied {condition.value} (n={n}, x={x}, r={r})')
    moments = merge_moments(batches)
    return ConditionalEstimate(
        estimate=moments.mean, se=moments.stderr, acceptance_rate=accepted / reps, accepted=accepted
    )


def _exp_weighted_integral(mags: np.ndarray, values: np.ndarray, lam: float) -> float:
    """Integral over [0, inf) of exp(-lam z) times the piecewise-linear interpolant extended linearly."""
    if mags[0] > 0:
        mags = np.concatenate(([0.0], mags))
        values = np.concatenate(([1.0], values))
    if len(mags) == 1:
        return float(values[0] / lam)
    z0, z1 = mags[:-1], mags[1:]
    slopes = np.diff(values) / np.diff(mags)
    e0, e1 = np.exp(-lam * z0), np.exp(-lam * z1)
    body = values[:-1] * (e0 - e1) / lam + slopes * (e0 / lam**2 - e1 * ((z1 - z0) / lam + 1.0 / lam**2))
    tail = math.exp(-lam * mags[-1]) * (values[-1] / lam + slopes[-1] / lam**2)
    return float(body.sum() + tail)


def mu_nu_normalizers(table_U: RenewalTable, table_V: RenewalTable, lam: float) -> TiltedMeasureSpec:
    if not lam > 0:
        raise DomainError(f'lambda must be positive, got {lam}')
    if table_U.side != RenewalSideEnum.U or table_V.side != RenewalSideEnum.V:
        raise DomainError('normalizers need a U table and a V table')
    c1 = 1.0 / _exp_weighted_integral(table_U.magnitudes, table_U.values, lam)
    c2 = 1.0 / _exp_weighted_integral(table_V.magnitudes, table_V.values, lam)
    return TiltedMeasureSpec(lam=lam, c1=c1, c2=c2)


def min_ratio_check(
    law: IncrementLaw, n: int, x: float, reps: int, table_U: RenewalTable, stream: StreamSpec
) -> ZCheck:
    """P(L_n >= -x) / P(L_n >= 0) on common paths against U(x)."""
    if x < 0:
        raise DomainError(f'level x must be nonnegative, got {x}')
    above_x = above_0 = 0
    for index, size in chunk_sizes(reps, _paths_per_chunk(n)):
        low = simulate_paths(law, n, size, stream.child(index).generator()).min(axis=1)
        above_x += int((low >= -x).sum())
        above_0 += int((low >= 0).sum())
    if not above_0:
        raise NoSampleError(f'no path out of {reps} stayed nonnegative up to n={n}')
    p_x, p_0 = above_x / reps, above_0 / reps
    ratio = p_x / p_0
    # {L_n >= 0} вложено в {L_n >= -x}
    rel_var = max((1.0 - p_0) / (reps * p_0) - (1.0 - p_x) / (reps * p_x), 0.0)
    se = math.sqrt(ratio**2 * rel_var + float(table_U.stderr_at(x)) ** 2)
    target = float(table_U.at(x))
    z = (ratio - target) / se if se > 0 else (0.0 if ratio == target else math.inf)
    return ZCheck(name=f'min_ratio(n={n},x={x})', left=ratio, right=target, z=z)
