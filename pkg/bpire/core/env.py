import math
from typing import Tuple

import numpy as np
from scipy.special import expit, log_expit

from bpire.errors import DomainError, InvalidLawError
from bpire.schema.law import DegenerateLaw, GaussianLaw, IncrementLaw, LaplaceLaw, TwoPointLatticeLaw, UniformLaw
from bpire.schema.report import HypothesisReport, LawMoments


def check_law(law: IncrementLaw) -> IncrementLaw:
    match law:
        case GaussianLaw(sigma=sigma) if not sigma > 0:
            raise InvalidLawError('gaussian', 'sigma', sigma, 'sigma > 0')
        case UniformLaw(half_width=half_width) if not half_width > 0:
            raise InvalidLawError('uniform', 'half_width', half_width, 'half_width > 0')
        case LaplaceLaw(scale=scale) if not 0 < scale < 1:
            raise InvalidLawError('laplace', 'scale', scale, 'scale in (0, 1)')
        case TwoPointLatticeLaw(step=step) if not step > 0:
            raise InvalidLawError('two_point_lattice', 'step', step, 'step > 0')
    for name, value in law:
        if isinstance(value, float) and not math.isfinite(value):
            raise InvalidLawError(law.family, name, value, 'a finite value')
    return law


def law_mgf(law: IncrementLaw, t: float) -> float:
    """E[exp(tX)] in closed form, +inf where it diverges."""
    match law:
        case GaussianLaw(sigma=sigma):
            exponent = 0.5 * (sigma * t) ** 2
            return math.exp(exponent) if exponent < 709.0 else math.inf
        case UniformLaw(half_width=h):
            if t == 0:
                return 1.0
            if abs(h * t) > 709.0:
                return math.inf
            return math.sinh(h * t) / (h * t)
        case LaplaceLaw(scale=b):
            if abs(b * t) >= 1.0:
                return math.inf
            return 1.0 / (1.0 - (b * t) ** 2)
        case TwoPointLatticeLaw(step=step):
            return math.cosh(step * t) if abs(step * t) < 709.0 else math.inf
        case DegenerateLaw():
            return 1.0
    raise DomainError(f'unknown law {law!r}')


def law_variance(law: IncrementLaw) -> float:
    match law:
        case GaussianLaw(sigma=sigma):
            return sigma**2
        case UniformLaw(half_width=h):
            return h**2 / 3.0
        case LaplaceLaw(scale=b):
            return 2.0 * b**2
        case TwoPointLatticeLaw(step=step):
            return step**2
        case DegenerateLaw():
            return 0.0
    raise DomainError(f'unknown law {law!r}')


def is_absolutely_continuous(law: IncrementLaw) -> bool:
    return isinstance(law, (GaussianLaw, UniformLaw, LaplaceLaw))


def validate_hypotheses(law: IncrementLaw) -> HypothesisReport:
    check_law(law)
    # все семейства центрированы по построению
    moments = LawMoments(
        mean=0.0,
        variance=law_variance(law),
        exp_plus=law_mgf(law, 1.0),
        exp_minus=law_mgf(law, -1.0),
    )
    a2_ok = 0.0 < moments.variance < math.inf and math.isfinite(moments.exp_plus) and math.isfinite(moments.exp_minus)
    a3_ok = is_absolutely_continuous(law)

    notes = []
    if not a3_ok:
        notes.append(f'{law.family} is not absolutely continuous: A3 fails, the proportional regime is out of reach')
    if not a2_ok:
        notes.append(f'{law.family} violates the moment conditions of A2')
    return HypothesisReport(a2_ok=a2_ok, a3_ok=a3_ok, moments=moments, notes='; '.join(notes))


def sample_increments(law: IncrementLaw, stream: np.random.Generator, size: int | Tuple[int, ...]) -> np.ndarray:
    match law:
        case GaussianLaw(sigma=sigma):
            return stream.normal(0.0, sigma, size=size)
        case UniformLaw(half_width=h):
            return stream.uniform(-h, h, size=size)
        case LaplaceLaw(scale=b):
            return stream.laplace(0.0, b, size=size)
        case TwoPointLatticeLaw(step=step):
            return np.where(stream.random(size=size) < 0.5, -step, step)
        case DegenerateLaw():
            return np.zeros(size)
    raise DomainError(f'unknown law {law!r}')


def sample_increment(law: IncrementLaw, stream: np.random.Generator) -> float:
    return float(sample_increments(law, stream, 1)[0])


def _check_finite(x: float) -> None:
    if not math.isfinite(x):
        raise DomainError(f'log mean offspring must be finite, got {x}')


def offspring_params(x: float) -> Tuple[float, float]:
    """Geometric offspring law with mean exp(x): P(k) = q p^k, so p/q = exp(x) and p + q = 1."""
    _check_finite(x)
    if x >= 0:
        q = float(expit(-x))
        return 1.0 - q, q
    p = float(expit(x))
    return p, 1.0 - p


def log_offspring_params(x: float) -> Tuple[float, float]:
    _check_finite(x)
    return float(log_expit(x)), float(log_expit(-x))
