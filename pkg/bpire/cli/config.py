import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Tuple

from pydantic import ValidationError

from bpire.core.env import check_law
from bpire.errors import ConfigError, InvalidLawError
from bpire.schema.config import ExperimentConfig


def key_line(text: str, key: str) -> int | None:
    """First line assigning ``key``, either as a plain key or inside an inline table."""
    pattern = re.compile(rf'(^|[\s{{,.]){re.escape(key)}\s*=')
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line.split('#', 1)[0]):
            return lineno
    return None


def _error_key(loc: Tuple[int | str, ...]) -> str | None:
    keys = [part for part in loc if isinstance(part, str)]
    return keys[-1] if keys else None


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f'config is not valid TOML: {e}') from e
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        error = e.errors()[0]
        key = _error_key(error['loc'])
        if error['type'] == 'extra_forbidden':
            message = 'unknown config key'
        else:
            message = f'invalid config value: {error["msg"]}'
        raise ConfigError(message, key=key, line=key_line(text, key) if key else None) from e
    try:
        check_law(config.law)
    except InvalidLawError as e:
        raise ConfigError(str(e), key=e.parameter, line=key_line(text, e.parameter)) from e
    return config


def load_config(path: Path) -> Tuple[ExperimentConfig, bytes]:
    try:
        content = Path(path).read_bytes()
    except OSError as e:
        raise ConfigError(f'cannot read config {path}: {e}') from e
    try:
        text = content.decode()
    except UnicodeDecodeError as e:
        raise ConfigError(f'config {path} is not UTF-8 text') from e
    return parse_config(text), content
