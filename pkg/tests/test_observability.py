import logging
from pathlib import Path

import pytest

from bpire.asymptotics.engine import MonteCarloEngine
from bpire.asymptotics.estimators import ClanProbKernel
from bpire.logger import ConsoleFormatter, run_id_ctx
from bpire.metrics import export_metrics
from bpire.on_startup.logger import setup_logger
from bpire.schema.law import GaussianLaw
from bpire.utils.rng import StreamSpec


def _record(message: str) -> logging.LogRecord:
    return logging.LogRecord('bpire', logging.INFO, __file__, 1, message, None, None)


def test_console_formatter_prefixes_run_id() -> None:
    formatter = ConsoleFormatter('%(levelname)s %(message)s')
    assert formatter.format(_record('plain')) == 'INFO plain'

    token = run_id_ctx.set('sweep-0123abcd')
    try:
        assert formatter.format(_record('tagged')) == '[sweep-0123abcd] INFO tagged'
    finally:
        run_id_ctx.reset(token)


def test_engine_metrics_reach_textfile(engine: MonteCarloEngine, stream: StreamSpec, tmp_path: Path) -> None:
    engine.run(ClanProbKernel(GaussianLaw(), 8, 0), stream, nsamples=100, label='metrics_check')
    export_metrics(str(tmp_path / 'bpire.prom'))

    text = (tmp_path / 'bpire.prom').read_text()
    assert 'bpire_paths_total{estimator="metrics_check"} 100.0' in text
    assert 'bpire_batch_latency_seconds_count{estimator="metrics_check"} 1.0' in text


def test_metrics_export_is_optional(tmp_path: Path) -> None:
    export_metrics(None)

    assert not list(tmp_path.iterdir())


@pytest.mark.parametrize(
    ('level', 'expected'),
    [
        ('debug', logging.DEBUG),
        ('WARNING', logging.WARNING),
        (None, logging.INFO),
        ('verbose', logging.INFO),
    ],
)
def test_setup_logger_level(level: str | None, expected: int) -> None:
    setup_logger(level)
    assert logging.getLogger('bpire').level == expected
    setup_logger()
