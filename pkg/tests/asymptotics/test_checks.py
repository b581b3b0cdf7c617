import numpy as np
import pytest

from tests.const import Z_TOLERANCE

from bpire.asymptotics.checks import (
    convention_relation_defect,
    decomposition_bound_excess,
    decomposition_check,
    duality_check,
    fraction_within,
    oracle_equivalence,
    sparre_andersen_check,
)
from bpire.asymptotics.engine import MonteCarloEngine
from bpire.core.gfalgebra import clan_prob
from bpire.core.walk import WalkPath
from bpire.errors import DomainError, PopulationOverflowError
from bpire.schema.enums import ConventionEnum
from bpire.schema.law import DegenerateLaw, GaussianLaw, IncrementLaw, TwoPointLatticeLaw, UniformLaw
from bpire.schema.report import DualityReport, OracleCell, ZCheck
from bpire.utils.rng import StreamSpec


@pytest.mark.parametrize('n', [1, 4, 64])
def test_duality(engine: MonteCarloEngine, stream: StreamSpec, n: int) -> None:
    report = duality_check(GaussianLaw(), n, 2**15, stream, engine=engine)

    assert abs(report.z) <= Z_TOLERANCE
    assert all(abs(check.z) <= Z_TOLERANCE for check in report.factorization)
    assert report.within(Z_TOLERANCE)
    if n == 1:
        assert report.p_tau == pytest.approx(0.5, abs=0.02)
    if n == 4:
        assert report.p_max == pytest.approx(70 / 256, abs=0.02)


@pytest.mark.parametrize(
    ('head_z', 'factor_z', 'within'),
    [
        (0.5, -0.5, True),
        (-3.0, 0.0, True),
        (3.5, 0.0, False),
        (0.0, -3.5, False),
    ],
)
def test_duality_report_gates_every_check(head_z: float, factor_z: float, within: bool) -> None:
    factor = ZCheck(name='split(r=1,lam=0.0)', left=0.5, right=0.5, z=factor_z)
    report = DualityReport(n=4, p_tau=0.3, p_max=0.3, z=head_z, factorization=[factor])

    assert factor.within(3.0) is (abs(factor_z) <= 3.0)
    assert report.within(3.0) is within


def test_duality_split_points(engine: MonteCarloEngine, stream: StreamSpec) -> None:
    report = duality_check(UniformLaw(), 8, 2048, stream, engine=engine)

    assert [check.name for check in report.factorization] == [
        'tilted_tau_at_end_vs_negative_max',
        'split(r=2,lam=0.0)',
        'split(r=2,lam=1.0)',
        'split(r=4,lam=0.0)',
        'split(r=4,lam=1.0)',
    ]


def test_duality_refuses_lattice(engine: MonteCarloEngine, stream: StreamSpec) -> None:
    with pytest.raises(DomainError):
        duality_check(TwoPointLatticeLaw(), 4, 100, stream, engine=engine)


@pytest.mark.parametrize('n', [1, 2, 5, 10])
def test_sparre_andersen(engine: MonteCarloEngine, stream: StreamSpec, n: int) -> None:
    assert abs(sparre_andersen_check(UniformLaw(), n, 2**15, stream, engine).z) <= Z_TOLERANCE


def test_oracle_agrees_with_closed_form(stream: StreamSpec) -> None:
    cells = oracle_equivalence(GaussianLaw(), 6, 4, 2 * 10**4, stream)

    assert len(cells) == 4 * 2 * 6
    for convention in ConventionEnum:
        assert fraction_within([cell for cell in cells if cell.convention == convention]) >= 0.9


def test_oracle_on_flat_environment(stream: StreamSpec) -> None:
    cells = oracle_equivalence(DegenerateLaw(), 4, 1, 10**5, stream, conventions=(ConventionEnum.strict,))

    assert [cell.exact for cell in cells] == pytest.approx([0.05, 1 / 15, 0.1, 0.2])
    assert fraction_within(cells) == 1.0


def test_oracle_horizon_is_bounded(stream: StreamSpec) -> None:
    with pytest.raises(DomainError):
        oracle_equivalence(GaussianLaw(), 17, 1, 10, stream)


def test_oracle_reports_overflow(stream: StreamSpec) -> None:
    with pytest.raises(PopulationOverflowError):
        oracle_equivalence(GaussianLaw(sigma=1000.0), 8, 20, 10, stream)


def test_cell_z_uses_exact_probability() -> None:
    cell = OracleCell(path_index=0, i=0, convention=ConventionEnum.strict, exact=0.25, freq=0.26, se=0.0, reps=7500)

    assert cell.z == pytest.approx(0.01 / np.sqrt(0.25 * 0.75 / 7500))
    assert fraction_within([cell], tolerance=1.0) == 0.0
    assert fraction_within([]) == 1.0


def test_decomposition(stream: StreamSpec) -> None:
    report = decomposition_check(GaussianLaw(), 5, 5, 2 * 10**4, stream)

    assert len(report.rows) == 5
    assert report.fraction_within >= 0.8
    for row in report.rows:
        assert row.clan_sum + row.no_survivor <= 1.0 + 1e-12


def test_flat_decomposition_multi_clan_mass(stream: StreamSpec) -> None:
    report = decomposition_check(DegenerateLaw(), 4, 1, 10**5, stream)
    row = report.rows[0]

    assert row.clan_sum == pytest.approx(0.05 + 1 / 15 + 0.1 + 0.2)
    assert row.no_survivor == pytest.approx(0.2)
    assert abs(row.z) <= Z_TOLERANCE


@pytest.mark.parametrize(
    ('law', 'n'),
    [
        (DegenerateLaw(), 4),
        (UniformLaw(), 8),
        (GaussianLaw(), 32),
        (GaussianLaw(sigma=5.0), 64),
    ],
)
def test_convention_relation_and_bound(stream: StreamSpec, law: IncrementLaw, n: int) -> None:
    assert convention_relation_defect(law, n, 500, stream) <= 1e-10
    assert decomposition_bound_excess(law, n, 500, stream) <= 1e-12


def test_convention_relation_on_flat_path() -> None:
    # X = 0, n = 4: a_n + b_n = 5, a_n + b_n - b_1 = 4
    path = WalkPath.from_increments([0.0] * 4)
    for i in (1, 2, 3):
        strict = clan_prob(path, i, ConventionEnum.strict).h
        corollary = clan_prob(path, i, ConventionEnum.paper_corollary).h
        assert strict * 5 == pytest.approx(corollary * 4, rel=1e-12)
