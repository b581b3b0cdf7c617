from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator

from bpire.schema.enums import WindowEnum
from bpire.schema.regime import Regime


class EstimatorResult(BaseModel):
    mean: float
    stderr: float
    nsamples: int
    master_seed: int
    batches: int
    budget_exceeded: bool = False

    model_config = ConfigDict(frozen=True)

    @property
    def relative_stderr(self) -> float:
        if self.mean == 0.0:
            return 0.0 if self.stderr == 0.0 else float('inf')
        return abs(self.stderr / self.mean)


class SeriesRow(BaseModel):
    n: int
    i_used: int | None = None
    estimate: float
    stderr: float
    nsamples: int
    seed: int
    budget_exceeded: bool = False


class ScalingSeries(BaseModel):
    label: str
    regime: Regime | None = None
    rows: List[SeriesRow] = []

    @model_validator(mode='after')
    def check_increasing(self) -> 'ScalingSeries':
        ns = [row.n for row in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError(f'series n must be strictly increasing, got {ns}')
        return self


class SlopeFit(BaseModel):
    slope: float
    intercept: float
    slope_ci_halfwidth: float = Field(serialization_alias='ci95')
    r_squared: float = Field(ge=0.0, le=1.0, serialization_alias='r2')
    points: int


class WalkParams(BaseModel):
    """Knobs of the walk functional kinds; each kind reads only its own."""

    model_config = ConfigDict(extra='forbid', frozen=True)

    lam: float = Field(1.0, gt=0.0)
    rho: float = Field(0.5, gt=0.0, lt=1.0)
    r: int | None = Field(None, ge=0)
    g: str = 'identity'
    h: str = 'inv_one_plus'
    s: float = Field(0.0, ge=0.0, lt=1.0)
    x: float = Field(0.0, ge=0.0)

    def tilt_index(self, n: int) -> int:
        return self.r if self.r is not None else int(self.rho * n)


class WindowResult(BaseModel):
    window: WindowEnum
    lo: int
    hi: int
    result: EstimatorResult
