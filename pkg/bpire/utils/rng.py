import zlib
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from bpire.errors import DomainError

MASK_64b = 0xFFFFFFFFFFFFFFFF


def stream_tag(name: str) -> int:
    return zlib.crc32(name.encode())


@dataclass(frozen=True)
class StreamSpec:
    """Splittable family of counter-based streams.

    A stream is fully determined by ``(master_seed, key)``; children extend the key, so batch ``b`` of
    the estimate at horizon ``n`` lives at ``spec.child(n).child(b)`` whatever the worker layout.
    """

    master_seed: int
    key: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= MASK_64b:
            raise DomainError(f'master seed must be an unsigned 64-bit integer, got {self.master_seed}')
        if any(k < 0 for k in self.key):
            raise DomainError(f'stream key entries must be nonnegative, got {self.key}')

    def child(self, *key: int) -> 'StreamSpec':
        return StreamSpec(self.master_seed, self.key + tuple(int(k) for k in key))

    def named(self, name: str) -> 'StreamSpec':
        return self.child(stream_tag(name))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(seq))


def make_stream(master_seed: int, *key: int) -> np.random.Generator:
    return StreamSpec(master_seed, tuple(key)).generator()
