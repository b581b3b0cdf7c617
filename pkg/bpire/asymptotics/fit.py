import math
from typing import List

import numpy as np
from scipy import stats

from bpire.errors import FitError
from bpire.logger import logger
from bpire.schema.estimator import ScalingSeries, SlopeFit


def _line(x: np.ndarray, slope: float, intercept: float) -> np.ndarray:
    return slope * x + intercept


def fit_log_slope(series: ScalingSeries) -> SlopeFit:
    """Weighted least squares of log(estimate) on log(n) with weights 1/(stderr/estimate)^2."""
    if len(series.rows) < 3:
        raise FitError(f'slope fit needs at least 3 rows, series {series.label} has {len(series.rows)}')
    estimates = np.array([row.estimate for row in series.rows])
    if np.any(estimates <= 0) or not np.all(np.isfinite(estimates)):
        raise FitError(f'slope fit needs positive estimates, series {series.label} has {estimates.tolist()}')
    x = np.log([row.n for row in series.rows])
    y = np.log(estimates)
    sigma = np.array([row.stderr for row in series.rows]) / estimates
    points = len(x)

    if np.all(sigma > 0):
        coef, cov = np.polyfit(x, y, 1, w=1.0 / sigma, cov='unscaled')
        weights = sigma**-2
        halfwidth = stats.norm.ppf(0.975) * math.sqrt(cov[0, 0])
    else:
        # есть строки с нулевой погрешностью
        coef, cov = np.polyfit(x, y, 1, cov='unscaled')
        weights = np.ones(points)
        rss = float(np.sum((y - np.polyval(coef, x)) ** 2))
        halfwidth = stats.t.ppf(0.975, points - 2) * math.sqrt(rss / (points - 2) * cov[0, 0])
    slope, intercept = float(coef[0]), float(coef[1])

    y_bar = np.average(y, weights=weights)
    ss_res = float(np.sum(weights * (y - _line(x, slope, intercept)) ** 2))
    ss_tot = float(np.sum(weights * (y - y_bar) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else float(ss_res == 0.0)

    fit = SlopeFit(
        slope=slope,
        intercept=intercept,
        slope_ci_halfwidth=float(halfwidth),
        r_squared=min(max(r_squared, 0.0), 1.0),
        points=points,
    )
    logger.info(
        'Fitted %s: slope=%.4f +- %.4f, r2=%.4f', series.label, fit.slope, fit.slope_ci_halfwidth, fit.r_squared
    )
    return fit


def stabilization_ratios(series: ScalingSeries, i_power: float, gap_power: float) -> List[float]:
    """Consecutive ratios of i^a (n - i)^b times the estimate; ratios near 1 mean the rescaled value has settled."""
    rescaled = []
    for row in series.rows:
        i = row.i_used if row.i_used is not None else 0
        if row.n - i <= 0:
            raise FitError(f'row n={row.n} has no gap to rescale with i={i}')
        rescaled.append(float(i) ** i_power * float(row.n - i) ** gap_power * row.estimate)
    return [b / a if a else math.inf for a, b in zip(rescaled, rescaled[1:])]
