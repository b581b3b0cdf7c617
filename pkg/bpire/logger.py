import logging
from contextvars import ContextVar
from pathlib import Path

import yaml

LOGGING_CONF_PATH = Path(__file__).resolve().parent.parent / 'conf' / 'logging.conf.yml'

with open(LOGGING_CONF_PATH, 'r') as f:
    LOGGING_CONFIG = yaml.safe_load(f)


class ConsoleFormatter(logging.Formatter):

    def format(self, record: logging.LogRecord) -> str:
        try:
            run_id = run_id_ctx.get()
            return '[%s] %s' % (run_id, super().format(record))
        except LookupError:
            return super().format(record)


run_id_ctx: ContextVar[str] = ContextVar('run_id_ctx')
logger = logging.getLogger('bpire')
