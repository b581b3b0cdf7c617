from pathlib import Path
from typing import Iterator

import numpy as np
import pytest

from tests.const import SEED, SMALL_BATCH
from tests.my_types import FixtureFunctionT

from bpire.asymptotics.engine import MonteCarloEngine
from bpire.utils.rng import StreamSpec


@pytest.fixture()
def stream() -> StreamSpec:
    return StreamSpec(SEED)


@pytest.fixture()
def rng(stream: StreamSpec) -> np.random.Generator:
    return stream.named('test').generator()


@pytest.fixture()
def engine() -> Iterator[MonteCarloEngine]:
    with MonteCarloEngine(workers=1, batch_size=SMALL_BATCH, batches_per_round=2, budget=2**16) as engine:
        yield engine


@pytest.fixture()
def _tmp_workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> FixtureFunctionT:
    monkeypatch.chdir(tmp_path)
