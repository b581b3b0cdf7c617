"""Fractional-linear generating functions under geometric offspring.

A coefficient ``(A, B)`` stands for ``F(s) = 1 - 1/(A/(1 - s) + B)``. In the variable ``t = 1/(1 - s)`` the map is
affine, ``t -> A t + B``, so composition is a monoid with identity ``(1, 0)``. Everything is kept as logs.
"""
import math
from dataclasses import dataclass
from functools import reduce
from typing import List, Sequence

import numpy as np
from scipy.special import logsumexp

from bpire.core.walk import WalkPath
from bpire.errors import DomainError
from bpire.schema.enums import ConventionEnum
from bpire.utils.logsumexp import log_suffix_sum_exp
from bpire.utils.reduce import pairwise_reduce


@dataclass(frozen=True)
class FracLinCoef:
    log_A: float
    log_B: float

    @property
    def A(self) -> float:
        return math.exp(self.log_A)

    @property
    def B(self) -> float:
        return math.exp(self.log_B)


IDENTITY = FracLinCoef(log_A=0.0, log_B=-math.inf)


@dataclass(frozen=True)
class ClanProbability:
    log_h: float
    convention: ConventionEnum

    @property
    def h(self) -> float:
        return math.exp(self.log_h)


def flin_from_increment(x: float) -> FracLinCoef:
    if not math.isfinite(x):
        raise DomainError(f'increment must be finite, got {x}')
    return FracLinCoef(log_A=-x, log_B=0.0)


def flin_compose(left: FracLinCoef, right: FracLinCoef) -> FracLinCoef:
    """``left`` covers the earlier generations: F_{0,m} composed with F_{m,n} gives F_{0,n}."""
    return FracLinCoef(
        log_A=left.log_A + right.log_A,
        log_B=float(np.logaddexp(left.log_B, left.log_A + right.log_B)),
    )


def flin_fold(increments: Sequence[float]) -> FracLinCoef:
    coefs = [flin_from_increment(float(x)) for x in increments]
    if not coefs:
        return IDENTITY
    # попарная свёртка, моноид ассоциативен
    return pairwise_reduce(coefs, flin_compose)


def flin_fold_left(increments: Sequence[float]) -> FracLinCoef:
    return reduce(flin_compose, (flin_from_increment(float(x)) for x in increments), IDENTITY)


def flin_eval(coef: FracLinCoef, s: float) -> float:
    if not 0.0 <= s < 1.0:
        raise DomainError(f'generating function argument must lie in [0, 1), got {s}')
    log_t = -math.log1p(-s)
    log_d = float(np.logaddexp(coef.log_A + log_t, coef.log_B))
    return -math.expm1(-log_d)


def suffix_coefficients(path: WalkPath) -> List[FracLinCoef]:
    """F_{k,n} for k = 0..n-1: log A = S_k - S_n and log B = log b_{k,n}."""
    sums = path.partial_sums
    n = path.n
    # log sum_{m=k}^{n-1} e^{-S_m}
    tail = log_suffix_sum_exp(-sums[:n])
    return [FracLinCoef(log_A=float(sums[k] - sums[n]), log_B=float(sums[k] + tail[k])) for k in range(n)]


def _check_index(n: int, i: int) -> None:
    if n < 1:
        raise DomainError(f'path horizon must be positive, got n={n}')
    if not 0 <= i <= n - 1:
        raise DomainError(f'clan index i={i} outside [0, {n - 1}]')


def _log_tails(sums: np.ndarray) -> np.ndarray:
    # T_k = log sum_{m=k}^{n} e^{-S_m}, so T_k = log(a_n + b_n - b_k) with b_0 = 0
    return log_suffix_sum_exp(-sums)


def log_clan_probs(sums: np.ndarray, convention: ConventionEnum = ConventionEnum.paper_corollary) -> np.ndarray:
    """log H_{i,n} for every i = 0..n-1 on paths given by partial sums of shape (..., n + 1)."""
    sums = np.asarray(sums, dtype=float)
    tails = _log_tails(sums)
    s_n = sums[..., -1:]
    t_0, t_1 = tails[..., :1], tails[..., 1:2]
    t_next = tails[..., 1:]
    if convention == ConventionEnum.strict:
        log_h = -sums[..., :-1] - s_n - t_0 - t_next
    else:
        log_h = -sums[..., :-1] - s_n - t_1 - t_next
    # i = 0: 1/(a_n + b_n) * a_n/(a_n + b_n - b_1) в обеих конвенциях
    log_h[..., 0] = (-s_n - t_0 - t_1)[..., 0]
    return log_h


def log_clan_prob_at(
    sums: np.ndarray, i: int, convention: ConventionEnum = ConventionEnum.paper_corollary
) -> np.ndarray:
    sums = np.asarray(sums, dtype=float)
    n = sums.shape[-1] - 1
    _check_index(n, i)
    t_0 = logsumexp(-sums, axis=-1)
    t_1 = logsumexp(-sums[..., 1:], axis=-1)
    s_n = sums[..., n]
    if i == 0:
        return -s_n - t_0 - t_1
    t_next = logsumexp(-sums[..., i + 1 :], axis=-1)
    if convention == ConventionEnum.strict:
        return -sums[..., i] - s_n - t_0 - t_next
    return -sums[..., i] - s_n - t_1 - t_next


def log_no_survivor(sums: np.ndarray) -> np.ndarray:
    sums = np.asarray(sums, dtype=float)
    return -sums[..., -1] - logsumexp(-sums, axis=-1)


def log_survival(sums: np.ndarray) -> np.ndarray:
    """log(1 - F_{0,n}(0)) = -log(a_n + b_n): survival of a BPRE without immigration started by one individual."""
    return -logsumexp(-np.asarray(sums, dtype=float), axis=-1)


def log_reversed_weights(sums: np.ndarray, j: int) -> np.ndarray:
    """log of e^{S_j} / sum_{k<j} e^{S_k} / sum_{k<n} e^{S_k}; at j = n the first sum runs over k <= n."""
    sums = np.asarray(sums, dtype=float)
    n = sums.shape[-1] - 1
    if not 1 <= j <= n:
        raise DomainError(f'reversed index j={j} outside [1, {n}]')
    head = logsumexp(sums[..., : n + 1 if j == n else j], axis=-1)
    total = logsumexp(sums[..., :n], axis=-1)
    return sums[..., j] - head - total


def clan_prob(
    path: WalkPath, i: int, convention: ConventionEnum = ConventionEnum.paper_corollary
) -> ClanProbability:
    _check_index(path.n, i)
    return ClanProbability(log_h=float(log_clan_prob_at(path.partial_sums, i, convention)), convention=convention)


def no_survivor_prob(path: WalkPath) -> float:
    _check_index(path.n, 0)
    return math.exp(float(log_no_survivor(path.partial_sums)))


def survival_prob(path: WalkPath) -> float:
    _check_index(path.n, 0)
    return math.exp(float(log_survival(path.partial_sums)))


def reversed_rep_weight(path: WalkPath, j: int) -> float:
    return math.exp(float(log_reversed_weights(path.partial_sums, j)))
