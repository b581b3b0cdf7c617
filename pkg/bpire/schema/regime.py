import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from bpire.errors import DomainError


class RegimeBase(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    def resolve(self, n: int) -> int:
        raise NotImplementedError

    def check(self, n: int) -> int:
        i = self.resolve(n)
        if not 0 <= i <= n - 1:
            raise DomainError(f'regime {self.label} gives i={i} outside [0, {n - 1}] at n={n}')
        return i

    @property
    def label(self) -> str:
        raise NotImplementedError


class FixedIRegime(RegimeBase):
    kind: Literal['fixed_i'] = 'fixed_i'
    i: int = Field(0, ge=0)

    def resolve(self, n: int) -> int:
        return self.i

    @property
    def label(self) -> str:
        return f'fixed_i({self.i})'


class FixedGapRegime(RegimeBase):
    kind: Literal['fixed_gap'] = 'fixed_gap'
    N: int = Field(1, ge=1)

    def resolve(self, n: int) -> int:
        return n - self.N

    @property
    def label(self) -> str:
        return f'fixed_gap({self.N})'


class ProportionalRegime(RegimeBase):
    kind: Literal['proportional'] = 'proportional'
    rho: float = Field(0.5, gt=0.0, lt=1.0)

    def resolve(self, n: int) -> int:
        return math.floor(self.rho * n)

    @property
    def label(self) -> str:
        return f'proportional({self.rho})'


Regime = Annotated[Union[FixedIRegime, FixedGapRegime, ProportionalRegime], Field(discriminator='kind')]
