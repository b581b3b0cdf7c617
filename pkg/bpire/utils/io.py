import csv
import io
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import orjson
from pydantic import BaseModel


def orjson_serializer(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode='json', by_alias=True)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f'cannot serialize {type(obj).__name__}')


def dumps_json(content: Any) -> bytes:
    return orjson.dumps(
        content,
        default=orjson_serializer,
        option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_APPEND_NEWLINE,
    )


def atomic_write_bytes(path: Path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as tmp:
            tmp.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_json(path: Path, content: Any) -> Path:
    try:
        return atomic_write_bytes(path, dumps_json(content))
    except OSError as e:
        raise OSError(f'cannot write {path}: {e}') from e


def _csv_cell(value: Any) -> Any:
    if value is None:
        return ''
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], comments: Sequence[str] = ()) -> bytes:
    buffer = io.StringIO()
    for comment in comments:
        buffer.write(f'# {comment}\n')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(value) for value in row])
    return buffer.getvalue().encode()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], comments: Sequence[str] = ()) -> Path:
    try:
        return atomic_write_bytes(path, render_csv(header, rows, comments))
    except OSError as e:
        raise OSError(f'cannot write {path}: {e}') from e
