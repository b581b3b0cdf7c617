"""Batched Monte Carlo with a reduction that does not depend on the worker layout.

Batch ``b`` always draws from ``stream.child(b)`` and holds ``settings.BATCH_SIZE`` paths, the adaptive mode grows
in rounds of ``settings.BATCHES_PER_ROUND`` batches, and batch moments are merged by a fixed pairwise tree over batch
indices. One worker or sixteen, the mean comes out bit for bit the same.
"""
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import List, Protocol, Sequence, Tuple

import numpy as np

from bpire.errors import DomainError
from bpire.logger import logger
from bpire.metrics import BATCH_LATENCY, BUDGET_EXCEEDED_TOTAL, PATHS_TOTAL
from bpire.schema.estimator import EstimatorResult
from bpire.utils.reduce import BatchMoments, chunk_sizes, merge_moments
from bpire.utils.rng import StreamSpec
from conf.config import settings


class PathKernel(Protocol):
    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        ...


def run_batch(kernel: PathKernel, spec: StreamSpec, size: int) -> Tuple[BatchMoments, float]:
    started = time.perf_counter()
    values = kernel(spec.generator(), size)
    return BatchMoments.from_values(values), time.perf_counter() - started


class MonteCarloEngine:
    def __init__(
        self,
        workers: int | None = None,
        batch_size: int | None = None,
        batches_per_round: int | None = None,
        budget: int | None = None,
    ):
        self.workers = workers or settings.WORKERS
        self.batch_size = batch_size or settings.BATCH_SIZE
        self.batches_per_round = batches_per_round or settings.BATCHES_PER_ROUND
        self.budget = budget or settings.SAMPLE_BUDGET
        if min(self.workers, self.batch_size, self.batches_per_round, self.budget) < 1:
            raise DomainError('engine workers, batch size, round length and budget must be positive')
        self._pool: Executor | None = None

    def __enter__(self) -> 'MonteCarloEngine':
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _run_batches(
        self, kernel: PathKernel, stream: StreamSpec, batches: Sequence[Tuple[int, int]], label: str
    ) -> List[BatchMoments]:
        specs = [stream.child(index) for index, _ in batches]
        sizes = [size for _, size in batches]
        if self.workers > 1 and len(batches) > 1:
            if self._pool is None:
                self._pool = ProcessPoolExecutor(max_workers=self.workers)
            outcomes = list(self._pool.map(run_batch, [kernel] * len(specs), specs, sizes))
        else:
            outcomes = [run_batch(kernel, spec, size) for spec, size in zip(specs, sizes)]
        for (_, elapsed), size in zip(outcomes, sizes):
            BATCH_LATENCY.labels(label).observe(elapsed)
            PATHS_TOTAL.labels(label).inc(size)
        return [moments for moments, _ in outcomes]

    def run(
        self,
        kernel: PathKernel,
        stream: StreamSpec,
        nsamples: int | None = None,
        rel_se_goal: float | None = None,
        label: str = 'estimator',
    ) -> EstimatorResult:
        """Either exactly ``nsamples`` paths, or rounds of full batches until the relative stderr meets the goal."""
        if (nsamples is None) == (rel_se_goal is None):
            raise DomainError('give exactly one of nsamples and rel_se_goal')
        if nsamples is not None:
            if nsamples < 1:
                raise DomainError(f'nsamples must be positive, got {nsamples}')
            batches = list(chunk_sizes(nsamples, self.batch_size))
            moments = merge_moments(self._run_batches(kernel, stream, batches, label))
            return self._result(moments, stream, budget_exceeded=False)

        assert rel_se_goal is not None
        if not rel_se_goal > 0:
            raise DomainError(f'relative stderr goal must be positive, got {rel_se_goal}')
        collected: List[BatchMoments] = []
        round_paths = self.batch_size * self.batches_per_round
        while True:
            start = len(collected)
            batches = [(start + k, self.batch_size) for k in range(self.batches_per_round)]
            collected.extend(self._run_batches(kernel, stream, batches, label))
            moments = merge_moments(collected)
            result = self._result(moments, stream, budget_exceeded=False)
            logger.debug(
                'Round %d of %s: mean=%.6g rel_se=%.4g paths=%d',
                len(collected) // self.batches_per_round,
                label,
                result.mean,
                result.relative_stderr,
                result.nsamples,
            )
            if result.relative_stderr <= rel_se_goal:
                return result
            if moments.count + round_paths > self.budget:
                BUDGET_EXCEEDED_TOTAL.labels(label).inc()
                logger.warning(
                    'Budget of %d paths exhausted for %s: rel_se=%.4g above goal %.4g',
                    self.budget,
                    label,
                    result.relative_stderr,
                    rel_se_goal,
                )
                return self._result(moments, stream, budget_exceeded=True)

    def _result(self, moments: BatchMoments, stream: StreamSpec, budget_exceeded: bool) -> EstimatorResult:
        return EstimatorResult(
            mean=moments.mean,
            stderr=moments.stderr,
            nsamples=moments.count,
            master_seed=stream.master_seed,
            batches=-(-moments.count // self.batch_size),
            budget_exceeded=budget_exceeded,
        )


def run_kernel(
    kernel: PathKernel,
    stream: StreamSpec,
    nsamples: int | None = None,
    rel_se_goal: float | None = None,
    label: str = 'estimator',
    engine: MonteCarloEngine | None = None,
) -> EstimatorResult:
    if engine is not None:
        return engine.run(kernel, stream, nsamples=nsamples, rel_se_goal=rel_se_goal, label=label)
    with MonteCarloEngine() as own:
        return own.run(kernel, stream, nsamples=nsamples, rel_se_goal=rel_se_goal, label=label)
