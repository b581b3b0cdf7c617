from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter


class LawBase(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class GaussianLaw(LawBase):
    family: Literal['gaussian'] = 'gaussian'
    sigma: float = 1.0


class UniformLaw(LawBase):
    family: Literal['uniform'] = 'uniform'
    half_width: float = 1.0


class LaplaceLaw(LawBase):
    """Density proportional to exp(-|x|/scale); scale < 1 keeps E[exp(+-X)] finite."""

    family: Literal['laplace'] = 'laplace'
    scale: float = 0.5


class TwoPointLatticeLaw(LawBase):
    family: Literal['two_point_lattice'] = 'two_point_lattice'
    step: float = 1.0


class DegenerateLaw(LawBase):
    # X = 0 almost surely, only for deterministic anchors in tests
    family: Literal['degenerate'] = 'degenerate'


IncrementLaw = Annotated[
    Union[GaussianLaw, UniformLaw, LaplaceLaw, TwoPointLatticeLaw, DegenerateLaw],
    Field(discriminator='family'),
]

LAW_ADAPTER: TypeAdapter[IncrementLaw] = TypeAdapter(IncrementLaw)
