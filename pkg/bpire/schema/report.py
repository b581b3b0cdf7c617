import math
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field

from bpire.schema.enums import ConventionEnum, RenewalSideEnum


class LawMoments(BaseModel):
    mean: float
    variance: float
    exp_plus: float
    exp_minus: float


class HypothesisReport(BaseModel):
    a1_ok: bool = True
    a2_ok: bool
    a3_ok: bool
    moments: LawMoments
    notes: str = ''

    model_config = ConfigDict(frozen=True)


class ZCheck(BaseModel):
    name: str
    left: float
    right: float
    z: float

    def within(self, tolerance: float) -> bool:
        return abs(self.z) <= tolerance


class DualityReport(BaseModel):
    n: int
    p_tau: float
    p_max: float
    z: float
    factorization: List[ZCheck] = []

    def within(self, tolerance: float) -> bool:
        return abs(self.z) <= tolerance and all(check.within(tolerance) for check in self.factorization)


class OracleCell(BaseModel):
    path_index: int
    i: int
    convention: ConventionEnum
    exact: float
    freq: float
    se: float
    reps: int

    @property
    def z(self) -> float:
        # при нулевой гипотезе частота биномиальна с вероятностью exact
        null_se = math.sqrt(max(self.exact * (1.0 - self.exact), 0.0) / self.reps)
        if null_se == 0.0:
            return 0.0 if self.freq == self.exact else float('inf')
        return (self.freq - self.exact) / null_se


class DecompositionRow(BaseModel):
    path_index: int
    clan_sum: float
    no_survivor: float
    multi_clan: float
    multi_clan_se: float
    deviation: float
    z: float


class DecompositionReport(BaseModel):
    n: int
    rows: List[DecompositionRow]
    max_abs_z: float
    fraction_within: float
    tolerance: float = 4.0


class IdentityReport(BaseModel):
    checks: Dict[str, bool]
    details: Dict[str, object] = {}

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


class TiltedMeasureSpec(BaseModel):
    lam: float = Field(gt=0.0, serialization_alias='lambda')
    c1: float = Field(gt=0.0)
    c2: float = Field(gt=0.0)

    model_config = ConfigDict(frozen=True)


class ConditionalEstimate(BaseModel):
    estimate: float
    se: float
    acceptance_rate: float
    accepted: int


class HarmonicityRow(BaseModel):
    """Residual of the one-step identity; se is the draw error, table_se bounds the error of the table itself."""

    side: RenewalSideEnum
    x: float
    residual: float
    se: float
    table_se: float = 0.0

    @property
    def z(self) -> float:
        scale = math.hypot(self.se, self.table_se)
        if scale == 0.0:
            return 0.0 if self.residual == 0.0 else float('inf')
        return self.residual / scale

    def within(self, tolerance: float) -> bool:
        return abs(self.z) <= tolerance
