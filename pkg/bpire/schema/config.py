from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from bpire.schema.enums import (
    ConventionEnum,
    EstimatorEnum,
    ExperimentKindEnum,
    IntegrandEnum,
    OutputFormatEnum,
    WalkKindEnum,
)
from bpire.schema.estimator import WalkParams
from bpire.schema.law import GaussianLaw, IncrementLaw
from bpire.schema.regime import Regime
from bpire.utils.rng import MASK_64b


class SectionBase(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class WalkSection(SectionBase):
    kind: WalkKindEnum
    reps: int = Field(2**17, ge=1)
    params: WalkParams = WalkParams()


class WindowsSection(SectionBase):
    N: List[int] = [8, 32]
    reps: int = Field(2**17, ge=1)
    integrand: IntegrandEnum = IntegrandEnum.clan


class RenewalSection(SectionBase):
    u_grid: List[float] = [0.0, 0.5, 1.0, 2.0]
    v_grid: List[float] = [0.0, -0.5, -1.0, -2.0]
    paths: int = Field(10**5, ge=1)
    cap: int = Field(10**6, ge=1)
    harmonicity_reps: int = Field(10**6, ge=1)
    lam: float = Field(1.0, gt=0.0)
    min_ratio_n: int | None = Field(None, ge=1)
    min_ratio_x: float = Field(1.0, ge=0.0)
    min_ratio_reps: int = Field(10**6, ge=1)


class OracleSection(SectionBase):
    n: int = Field(8, ge=1, le=16)
    env_samples: int = Field(20, ge=1)
    branch_reps: int = Field(2 * 10**5, ge=1)


class IdentitiesSection(SectionBase):
    duality_n: List[int] = [1, 4, 64]
    reps: int = Field(2**18, ge=1)
    sparre_andersen_n: List[int] = [1, 2, 5, 10]
    harmonicity_x: List[float] = [0.5, 1.0, 2.0]
    renewal_paths: int = Field(10**5, ge=1)
    renewal_cap: int = Field(10**5, ge=1)
    decomposition_n: int = Field(4, ge=1, le=16)
    env_samples: int = Field(5, ge=1)
    branch_reps: int = Field(2 * 10**4, ge=1)
    relation_n: int = Field(32, ge=1)
    relation_paths: int = Field(10**4, ge=1)
    tolerance: float = Field(4.0, gt=0.0)


class ExperimentConfig(BaseModel):
    """One experiment read from TOML; every key unknown to the schema is an error."""

    model_config = ConfigDict(extra='forbid', frozen=True)

    kind: ExperimentKindEnum | None = None
    law: IncrementLaw = GaussianLaw()
    seed: int = Field(0, ge=0, le=MASK_64b)
    workers: int | None = Field(None, ge=1)
    out_dir: str | None = None
    format: OutputFormatEnum = OutputFormatEnum.csv
    convention: ConventionEnum = ConventionEnum.paper_corollary
    estimator: EstimatorEnum = EstimatorEnum.direct

    regime: Regime | None = None
    n: int | None = Field(None, ge=1)
    n_grid: List[int] | None = None
    nsamples: int | None = Field(None, ge=1)
    rel_se_goal: float | None = Field(None, gt=0.0)
    budget: int | None = Field(None, ge=1)

    walk: WalkSection | None = None
    windows: WindowsSection | None = None
    renewal: RenewalSection = RenewalSection()
    oracle: OracleSection = OracleSection()
    identities: IdentitiesSection = IdentitiesSection()

    @field_validator('n_grid')
    @classmethod
    def check_grid(cls, value: List[int] | None) -> List[int] | None:
        if value is not None and any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError('n_grid must be strictly increasing')
        return value

    @model_validator(mode='after')
    def check_precision(self) -> 'ExperimentConfig':
        if self.nsamples is not None and self.rel_se_goal is not None:
            raise ValueError('give either nsamples or rel_se_goal, not both')
        return self

    def required(self, kind: ExperimentKindEnum) -> List[str]:
        """Keys the given kind cannot run without."""
        needs = {
            ExperimentKindEnum.estimate: ('regime', 'n'),
            ExperimentKindEnum.sweep: ('regime', 'n_grid'),
            ExperimentKindEnum.walkseries: ('walk', 'n_grid'),
        }.get(kind, ())
        return [key for key in needs if getattr(self, key) is None]
