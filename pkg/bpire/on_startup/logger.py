import logging.config

from bpire.logger import LOGGING_CONFIG, logger
from conf.config import settings

LOG_LEVELS = {
    'debug': logging.DEBUG,
    'info': logging.INFO,
    'warning': logging.WARNING,
    'error': logging.ERROR,
}


def setup_logger(level: str | None = None) -> None:
    """Apply the YAML config, then the `bpire` level from the argument or BPIRE_LOG_LEVEL."""
    logging.config.dictConfig(LOGGING_CONFIG)

    name = (level or settings.LOG_LEVEL).lower()
    if name not in LOG_LEVELS:
        logger.warning('unknown log level %r, keeping info', name)
        return
    logger.setLevel(LOG_LEVELS[name])
