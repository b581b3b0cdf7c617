import hashlib
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List

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
from bpire.asymptotics.estimators import estimate_event_prob, estimate_event_prob_reversed
from bpire.asymptotics.fit import fit_log_slope, stabilization_ratios
from bpire.asymptotics.series import regime_scaling, scaling_sweep, walk_functional_series, walk_scaling
from bpire.asymptotics.windows import tau_decomposition
from bpire.cli.artifacts import ArtifactSet
from bpire.cli.config import load_config
from bpire.core.conditioned import estimate_U, estimate_V, harmonicity_residual, min_ratio_check, mu_nu_normalizers
from bpire.core.env import validate_hypotheses
from bpire.errors import BpireError, ConfigError, IdentityViolation
from bpire.logger import logger, run_id_ctx
from bpire.metrics import export_metrics
from bpire.schema.config import ExperimentConfig
from bpire.schema.enums import ConventionEnum, EstimatorEnum, ExperimentKindEnum, OutputFormatEnum, WindowEnum
from bpire.schema.estimator import ScalingSeries
from bpire.schema.report import IdentityReport
from bpire.utils.rng import StreamSpec
from conf.config import settings


@dataclass
class RunContext:
    config: ExperimentConfig
    stream: StreamSpec
    engine: MonteCarloEngine
    artifacts: ArtifactSet
    fmt: OutputFormatEnum

    @property
    def precision(self) -> Dict[str, Any]:
        if self.config.nsamples is None and self.config.rel_se_goal is None:
            return {'nsamples': settings.BATCH_SIZE * settings.BATCHES_PER_ROUND, 'rel_se_goal': None}
        return {'nsamples': self.config.nsamples, 'rel_se_goal': self.config.rel_se_goal}


def run_validate(ctx: RunContext) -> None:
    report = validate_hypotheses(ctx.config.law)
    ctx.artifacts.json('report.json', {'law': ctx.config.law, 'report': report})


def run_estimate(ctx: RunContext) -> None:
    config = ctx.config
    assert config.regime is not None and config.n is not None
    n, regime = config.n, config.regime
    i = regime.check(n)
    stream = ctx.stream.child(n)
    content: Dict[str, Any] = {'n': n, 'i': i, 'regime': regime, 'convention': config.convention}
    if config.estimator in (EstimatorEnum.direct, EstimatorEnum.both):
        content['direct'] = estimate_event_prob(
            config.law, regime, n, stream, convention=config.convention, engine=ctx.engine, **ctx.precision
        )
    if config.estimator in (EstimatorEnum.reversed, EstimatorEnum.both):
        content['reversed'] = estimate_event_prob_reversed(
            config.law, regime, n, stream.named('reversed'), engine=ctx.engine, **ctx.precision
        )
    if config.estimator == EstimatorEnum.both:
        direct, reverse = content['direct'], content['reversed']
        se = math.hypot(direct.stderr, reverse.stderr)
        content['z'] = (direct.mean - reverse.mean) / se if se > 0 else 0.0
    ctx.artifacts.json('estimate.json', content)

    if config.windows is not None:
        j = n - i
        decompositions = []
        for width in config.windows.N:
            parts = tau_decomposition(
                config.law,
                j,
                n,
                width,
                config.windows.reps,
                stream.named('windows'),
                config.windows.integrand,
                ctx.engine,
            )
            full = parts[WindowEnum.full].result.mean
            far = parts[WindowEnum.k1_k2].result.mean
            decompositions.append(
                {
                    'N': width,
                    'parts': {window.value: part for window, part in parts.items()},
                    'far_ratio': far / full if full > 0 else None,
                }
            )
        ctx.artifacts.json(
            'windows.json', {'j': j, 'n': n, 'integrand': config.windows.integrand, 'decompositions': decompositions}
        )


def _fit_artifacts(ctx: RunContext, series: ScalingSeries, expected: float, i_power: float, gap_power: float) -> None:
    ctx.artifacts.series('series', series, ctx.fmt)
    if len(series.rows) < 3:
        logger.info('Series %s has %d rows, slope fit skipped', series.label, len(series.rows))
        return
    fit = fit_log_slope(series)
    ratios = stabilization_ratios(series, i_power, gap_power)
    ctx.artifacts.slope('slope.json', fit, expected_slope=expected, stabilization_ratios=ratios)
    ctx.artifacts.plot('plot.csv', series, fit)


def run_sweep(ctx: RunContext) -> None:
    config = ctx.config
    assert config.regime is not None and config.n_grid is not None
    series = scaling_sweep(
        config.law,
        config.regime,
        config.n_grid,
        ctx.stream,
        convention=config.convention,
        estimator=EstimatorEnum.reversed if config.estimator == EstimatorEnum.reversed else EstimatorEnum.direct,
        engine=ctx.engine,
        **ctx.precision,
    )
    _fit_artifacts(ctx, series, *regime_scaling(config.regime))


def run_walkseries(ctx: RunContext) -> None:
    config = ctx.config
    assert config.walk is not None and config.n_grid is not None
    walk = config.walk
    series = walk_functional_series(
        config.law, walk.kind, config.n_grid, walk.reps, ctx.stream, walk.params, engine=ctx.engine
    )
    _fit_artifacts(ctx, series, *walk_scaling(walk.kind, walk.params))


def run_renewal(ctx: RunContext) -> None:
    config, section = ctx.config, ctx.config.renewal
    table_U = estimate_U(config.law, section.u_grid, section.paths, section.cap, ctx.stream.named('U'))
    table_V = estimate_V(config.law, section.v_grid, section.paths, section.cap, ctx.stream.named('V'))
    table_U.to_csv(ctx.artifacts.register('U.csv'))
    table_V.to_csv(ctx.artifacts.register('V.csv'))

    harmonic = ctx.stream.named('harmonicity')
    residuals = [
        harmonicity_residual(config.law, table, float(x), section.harmonicity_reps, harmonic.child(k))
        for k, (table, x) in enumerate([(table_U, x) for x in table_U.grid] + [(table_V, x) for x in table_V.grid])
    ]
    content: Dict[str, Any] = {
        'harmonicity': residuals,
        'normalizers': mu_nu_normalizers(table_U, table_V, section.lam),
        'truncated_fraction': {'U': table_U.truncated_fraction, 'V': table_V.truncated_fraction},
    }
    if section.min_ratio_n is not None:
        content['min_ratio'] = min_ratio_check(
            config.law,
            section.min_ratio_n,
            section.min_ratio_x,
            section.min_ratio_reps,
            table_U,
            ctx.stream.named('min_ratio'),
        )
    ctx.artifacts.json('renewal.json', content)


def run_identities(ctx: RunContext) -> None:
    config, section = ctx.config, ctx.config.identities
    law, tolerance = config.law, section.tolerance
    checks: Dict[str, bool] = {}
    details: Dict[str, Any] = {}

    for n in section.duality_n:
        report = duality_check(law, n, section.reps, ctx.stream.named('duality').child(n), engine=ctx.engine)
        checks[f'duality_n{n}'] = report.within(tolerance)
        details[f'duality_n{n}'] = report
    for n in section.sparre_andersen_n:
        check = sparre_andersen_check(law, n, section.reps, ctx.stream.named('sparre_andersen').child(n), ctx.engine)
        checks[check.name] = check.within(tolerance)
        details[check.name] = check

    grid = [0.0, *section.harmonicity_x]
    tables = (
        estimate_U(law, grid, section.renewal_paths, section.renewal_cap, ctx.stream.named('U')),
        estimate_V(law, [-x for x in grid], section.renewal_paths, section.renewal_cap, ctx.stream.named('V')),
    )
    for table in tables:
        checks[f'renewal_{table.side.value}_at_zero'] = float(table.at(0.0)) == 1.0
        for k, x in enumerate(table.grid):
            row = harmonicity_residual(
                law, table, float(x), section.reps, ctx.stream.named(f'harmonicity_{table.side.value}').child(k)
            )
            checks[f'harmonicity_{table.side.value}({x})'] = row.within(tolerance)
            details[f'harmonicity_{table.side.value}({x})'] = row

    decomposition = decomposition_check(
        law,
        section.decomposition_n,
        section.env_samples,
        section.branch_reps,
        ctx.stream.named('decomposition'),
        tolerance,
    )
    checks['decomposition'] = decomposition.fraction_within >= 0.95
    details['decomposition'] = decomposition

    defect = convention_relation_defect(
        law, section.relation_n, section.relation_paths, ctx.stream.named('convention_relation')
    )
    checks['convention_relation'] = defect <= 1e-10
    details['convention_relation_max_log_defect'] = defect
    excess = decomposition_bound_excess(
        law, section.relation_n, section.relation_paths, ctx.stream.named('decomposition_bound')
    )
    checks['decomposition_bound'] = excess <= 1e-12
    details['decomposition_bound_max_log'] = excess

    report = IdentityReport(checks=checks, details=details)
    ctx.artifacts.json('identities.json', {'ok': report.ok, 'report': report})
    if not report.ok:
        failed = sorted(name for name, ok in checks.items() if not ok)
        raise IdentityViolation(f'identity checks failed: {", ".join(failed)}')


def run_oracle(ctx: RunContext) -> None:
    config, section = ctx.config, ctx.config.oracle
    cells = oracle_equivalence(
        config.law, section.n, section.env_samples, section.branch_reps, ctx.stream.named('oracle')
    )
    summary = {
        convention.value: fraction_within([cell for cell in cells if cell.convention == convention])
        for convention in ConventionEnum
    }
    decomposition = decomposition_check(
        config.law, section.n, section.env_samples, section.branch_reps, ctx.stream.named('decomposition')
    )
    ctx.artifacts.json(
        'oracle.json',
        {'n': section.n, 'fraction_within': summary, 'cells': cells, 'decomposition': decomposition},
    )


HANDLERS: Dict[ExperimentKindEnum, Callable[[RunContext], None]] = {
    ExperimentKindEnum.validate: run_validate,
    ExperimentKindEnum.estimate: run_estimate,
    ExperimentKindEnum.sweep: run_sweep,
    ExperimentKindEnum.walkseries: run_walkseries,
    ExperimentKindEnum.renewal: run_renewal,
    ExperimentKindEnum.identities: run_identities,
    ExperimentKindEnum.oracle: run_oracle,
}


def _resolve_kind(config: ExperimentConfig, kind: ExperimentKindEnum | str | None) -> ExperimentKindEnum:
    if kind is None:
        if config.kind is None:
            raise ConfigError('experiment kind is given neither on the command line nor in the config')
        return config.kind
    kind = ExperimentKindEnum(kind)
    if config.kind is not None and config.kind != kind:
        raise ConfigError(f'config is for {config.kind.value}, not {kind.value}', key='kind')
    return kind


def run_experiment(
    config_path: Path,
    kind: ExperimentKindEnum | str | None = None,
    seed: int | None = None,
    workers: int | None = None,
    out: Path | None = None,
    fmt: OutputFormatEnum | None = None,
) -> int:
    """Run one experiment and return the process exit code: 0 ok, 1 config, 2 numeric, 3 identity violation."""
    started = time.perf_counter()
    artifacts: ArtifactSet | None = None
    token = None
    try:
        config, raw = load_config(Path(config_path))
        resolved = _resolve_kind(config, kind)
        missing = config.required(resolved)
        if missing:
            raise ConfigError(f'{resolved.value} needs key `{missing[0]}`')
        master_seed = config.seed if seed is None else seed
        stream = StreamSpec(master_seed)
        token = run_id_ctx.set(f'{resolved.value}-{hashlib.sha256(raw).hexdigest()[:8]}')
        workers = workers or config.workers or settings.WORKERS
        artifacts = ArtifactSet(Path(out or config.out_dir or settings.OUT_DIR))
        logger.info(
            'Experiment %s started: config=%s seed=%d workers=%d', resolved.value, config_path, master_seed, workers
        )
        with MonteCarloEngine(workers=workers, budget=config.budget) as engine:
            HANDLERS[resolved](RunContext(config, stream, engine, artifacts, fmt or config.format))
        _finish(artifacts, raw, master_seed, workers, resolved, started)
        return 0
    except BpireError as e:
        logger.error('Experiment failed: %s', e)
        if artifacts is not None and artifacts.names:
            _finish(artifacts, raw, master_seed, workers or 1, resolved, started)
        return e.exit_code
    except OSError as e:
        logger.error('Experiment failed: %s', e)
        return 1
    finally:
        if token is not None:
            run_id_ctx.reset(token)


def _finish(
    artifacts: ArtifactSet, raw: bytes, seed: int, workers: int, kind: ExperimentKindEnum, started: float
) -> List[str]:
    wall_time = time.perf_counter() - started
    artifacts.manifest(raw, seed, workers, kind.value, wall_time)
    export_metrics(settings.METRICS_TEXTFILE)
    logger.info('Experiment finished in %.1fs: %s', wall_time, ', '.join(sorted(artifacts.names)))
    return artifacts.names
