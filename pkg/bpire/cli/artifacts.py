import hashlib
import platform
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import scipy

from bpire import __version__
from bpire.errors import DomainError
from bpire.schema.enums import OutputFormatEnum
from bpire.schema.estimator import ScalingSeries, SlopeFit
from bpire.utils.io import write_csv, write_json

MANIFEST_NAME = 'manifest.json'
SERIES_HEADER = ('n', 'i', 'estimate', 'stderr', 'nsamples', 'seed')


class ArtifactSet:
    """Artifacts of one run, written atomically into ``out_dir`` and listed in the manifest."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.names: List[str] = []

    def _path(self, name: str) -> Path:
        self.names.append(name)
        return self.out_dir / name

    def json(self, name: str, content: Dict[str, Any]) -> Path:
        return write_json(self._path(name), {**content, 'manifest': MANIFEST_NAME})

    def series(self, name: str, series: ScalingSeries, fmt: OutputFormatEnum) -> Path:
        if fmt == OutputFormatEnum.json:
            return self.json(f'{name}.json', {'series': series})
        rows = [(row.n, row.i_used, row.estimate, row.stderr, row.nsamples, row.seed) for row in series.rows]
        return write_csv(self._path(f'{name}.csv'), SERIES_HEADER, rows)

    def slope(self, name: str, fit: SlopeFit, **extra: Any) -> Path:
        return self.json(name, {**fit.model_dump(by_alias=True), **extra})

    def plot(self, name: str, series: ScalingSeries, fit: SlopeFit) -> Path:
        return emit_plot_data(series, fit, self._path(name))

    def register(self, name: str) -> Path:
        return self._path(name)

    def manifest(self, config: bytes, seed: int, workers: int, kind: str, wall_time: float) -> Path:
        return write_json(
            self.out_dir / MANIFEST_NAME,
            {
                'kind': kind,
                'config_sha256': hashlib.sha256(config).hexdigest(),
                'seed': seed,
                'workers': workers,
                'versions': {
                    'bpire': __version__,
                    'numpy': np.__version__,
                    'scipy': scipy.__version__,
                    'python': platform.python_version(),
                },
                'wall_time_seconds': round(wall_time, 3),
                'artifacts': sorted(self.names),
            },
        )


def emit_plot_data(series: ScalingSeries, fit: SlopeFit, out: Path) -> Path:
    """log n, log estimate and the fitted line at the same abscissae; rendering is left to the consumer."""
    if not series.rows:
        raise DomainError(f'series {series.label} is empty, nothing to plot')
    rows = []
    for row in series.rows:
        if row.estimate <= 0:
            raise DomainError(f'series {series.label} has a nonpositive estimate at n={row.n}')
        log_n = float(np.log(row.n))
        rows.append((log_n, float(np.log(row.estimate)), fit.slope * log_n + fit.intercept))
    return write_csv(out, ('log_n', 'log_est', 'log_fit'), rows)
