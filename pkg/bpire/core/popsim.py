"""Forward simulation of the population with one immigrant per generation, clans labelled by arrival time."""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import expit

from bpire.core.walk import WalkPath
from bpire.errors import DomainError, PopulationOverflowError
from bpire.logger import logger
from bpire.schema.enums import ConventionEnum
from bpire.schema.report import ZCheck

MAX_CLAN_SIZE = 2**62


@dataclass(frozen=True)
class ClanVector:
    generation: int
    sizes: np.ndarray

    @classmethod
    def founder(cls) -> 'ClanVector':
        return cls(generation=0, sizes=np.ones(1, dtype=np.int64))

    @property
    def y_minus(self) -> np.ndarray:
        # Y_g^-: без иммигранта текущего поколения
        return self.sizes[: self.generation]

    @property
    def total(self) -> int:
        return int(self.sizes.sum())


def _extinction_q(x: float) -> float:
    if not math.isfinite(x):
        raise DomainError(f'increment must be finite, got {x}')
    return float(expit(-x))


def _reproduce(sizes: np.ndarray, q: float, stream: np.random.Generator) -> np.ndarray:
    """Total offspring of each clan: a sum of z geometric(q) variables is negative binomial(z, q)."""
    out = np.zeros_like(sizes)
    alive = sizes > 0
    if not alive.any():
        return out
    if q <= 0.0:
        raise PopulationOverflowError('mean offspring overflows double precision, clan sizes diverge')
    try:
        drawn = stream.negative_binomial(sizes[alive], q)
    except ValueError as exc:
        raise PopulationOverflowError(f'negative binomial draw failed: {exc}') from exc
    if drawn.max(initial=0) > MAX_CLAN_SIZE:
        raise PopulationOverflowError(f'clan size exceeded the cap {MAX_CLAN_SIZE}')
    out[alive] = drawn
    return out


def step_generation(clans: ClanVector, x: float, stream: np.random.Generator) -> ClanVector:
    q = _extinction_q(x)
    sizes = np.append(_reproduce(clans.sizes, q, stream), np.int64(1))
    return ClanVector(generation=clans.generation + 1, sizes=sizes)


def simulate_population(path: WalkPath, stream: np.random.Generator) -> ClanVector:
    if path.n < 1:
        raise DomainError(f'path horizon must be positive, got n={path.n}')
    clans = ClanVector.founder()
    for x in path.increments:
        clans = step_generation(clans, float(x), stream)
    return clans


def simulate_populations(path: WalkPath, reps: int, stream: np.random.Generator) -> np.ndarray:
    """Y_n^- clan sizes of ``reps`` independent populations in the same environment, shape ``(reps, n)``."""
    n = path.n
    if n < 1:
        raise DomainError(f'path horizon must be positive, got n={n}')
    if reps < 1:
        raise DomainError(f'reps must be positive, got {reps}')
    sizes = np.zeros((reps, n + 1), dtype=np.int64)
    sizes[:, 0] = 1
    for g, x in enumerate(path.increments, start=1):
        q = _extinction_q(float(x))
        sizes[:, :g] = _reproduce(sizes[:, :g], q, stream)
        sizes[:, g] = 1
    return sizes[:, :n]


def _check_clan(n: int, i: int) -> None:
    if not 0 <= i <= n - 1:
        raise DomainError(f'clan index i={i} outside [0, {n - 1}]')


def event_indicators(y_minus: np.ndarray, i: int, convention: ConventionEnum) -> np.ndarray:
    """Only clan ``i`` survives among the first n clans, row-wise over an array of Y_n^- views."""
    y_minus = np.atleast_2d(y_minus)
    n = y_minus.shape[1]
    _check_clan(n, i)
    alive = y_minus > 0
    others = alive.sum(axis=1) - alive[:, i]
    if convention == ConventionEnum.paper_corollary and i >= 1:
        # клан 0 не ограничен
        others = others - alive[:, 0]
    return alive[:, i] & (others == 0)


def event_indicator(clans: ClanVector, i: int, convention: ConventionEnum = ConventionEnum.paper_corollary) -> bool:
    return bool(event_indicators(clans.y_minus, i, convention)[0])


def surviving_clans(y_minus: np.ndarray) -> np.ndarray:
    return (np.atleast_2d(y_minus) > 0).sum(axis=1)


def binomial_se(freq: float, reps: int) -> float:
    return math.sqrt(freq * (1.0 - freq) / reps)


def oracle_event_frequency(
    path: WalkPath, i: int, convention: ConventionEnum, reps: int, stream: np.random.Generator
) -> Tuple[float, float]:
    _check_clan(path.n, i)
    hits = event_indicators(simulate_populations(path, reps, stream), i, convention)
    freq = float(hits.mean())
    return freq, binomial_se(freq, reps)


def clan_extinction_factorization(
    path: WalkPath, k1: int, k2: int, reps: int, stream: np.random.Generator
) -> ZCheck:
    """Joint extinction of two clans against the product of the marginals on the same replicates."""
    _check_clan(path.n, k1)
    _check_clan(path.n, k2)
    if k1 == k2:
        raise DomainError('factorization needs two distinct clans')
    dead = simulate_populations(path, reps, stream) == 0
    p1 = float(dead[:, k1].mean())
    p2 = float(dead[:, k2].mean())
    joint = float((dead[:, k1] & dead[:, k2]).mean())
    se = math.sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2) / reps)
    if se > 0.0:
        z = (joint - p1 * p2) / se
    else:
        z = 0.0 if math.isclose(joint, p1 * p2) else math.inf
    logger.debug('Clan extinction factorization k1=%d k2=%d joint=%.6f product=%.6f', k1, k2, joint, p1 * p2)
    return ZCheck(name=f'extinction({k1},{k2})', left=joint, right=p1 * p2, z=z)
