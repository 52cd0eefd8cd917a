"""Marchenko-Pastur law numerics for a point-mass population spectrum.

For aspect ratio c > 0 and scale sigma2, the continuous part has density

    p(x) = sqrt((b - x)(x - a)) / (2 pi x c sigma2)   on [a, b],

with a = sigma2 (1 - sqrt(c))^2 and b = sigma2 (1 + sqrt(c))^2, plus a point
mass of 1 - 1/c at the origin when c > 1.  Integrals use the substitution
x = sigma2 (1 + c - 2 sqrt(c) cos(theta)), which removes the inverse-
square-root behaviour at the edges: the CDF integrand becomes

    f(theta) = 2 sin(theta)^2 / (pi (1 + c - 2 sqrt(c) cos(theta))).
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import InputError, NumericError

_QUANTILE_XTOL = 1e-12
_QUANTILE_MAX_ITER = 200


@dataclass(frozen=True)
class MpLaw:
    """Marchenko-Pastur distribution with aspect ratio ``c`` and scale ``sigma2``."""

    c: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise InputError(f"aspect ratio must be positive, got c={self.c}")
        if not self.sigma2 > 0:
            raise InputError(f"scale must be positive, got sigma2={self.sigma2}")


def support_edges(law: MpLaw):
    """Endpoints (a, b) of the continuous support."""
    root = math.sqrt(law.c)
    return law.sigma2 * (1 - root) ** 2, law.sigma2 * (1 + root) ** 2


def atom_at_zero(law: MpLaw) -> float:
    """Mass of the point at the origin: 1 - 1/c for c > 1, else 0."""
    return 1.0 - 1.0 / law.c if law.c > 1 else 0.0


def density(law: MpLaw, x):
    """Continuous density at ``x`` (0 outside [a, b]; never includes the atom)."""
    a, b = support_edges(law)
    x = np.asarray(x, dtype=float)
    inside = (x > a) & (x < b) & (x > 0)
    out = np.zeros_like(x)
    xv = np.where(inside, x, 1.0)  # dummy positive value outside support
    out = np.where(
        inside,
        np.sqrt(np.clip((b - xv) * (xv - a), 0.0, None))
        / (2 * np.pi * xv * law.c * law.sigma2),
        0.0,
    )
    return float(out) if out.ndim == 0 else out


def _theta_integrand(theta, c):
    denom = 1.0 + c - 2.0 * math.sqrt(c) * math.cos(theta)
    if denom <= 0:  # only reachable at theta=0 when c=1
        return 2.0 / math.pi
    return 2.0 * math.sin(theta) ** 2 / (math.pi * denom)


def _theta_of(law: MpLaw, x: float) -> float:
    arg = (1.0 + law.c - x / law.sigma2) / (2.0 * math.sqrt(law.c))
    return math.acos(min(1.0, max(-1.0, arg)))


def _bulk_mass_below(law: MpLaw, x: float) -> float:
    val, _ = integrate.quad(
        _theta_integrand, 0.0, _theta_of(law, x), args=(law.c,),
        epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    return val


def cdf(law: MpLaw, x: float) -> float:
    """Distribution function, including the atom at the origin when c > 1."""
    a, b = support_edges(law)
    atom = atom_at_zero(law)
    if x < a or (x <= 0 and a == 0):
        return atom if x >= 0 else 0.0
    if x >= b:
        return 1.0
    return atom + _bulk_mass_below(law, x)


def quantile(law: MpLaw, q: float) -> float:
    """Inverse CDF by bisection on the support; q at or below the atom maps to 0."""
    if not 0.0 < q < 1.0:
        raise InputError(f"quantile level must be in (0, 1), got {q}")
    atom = atom_at_zero(law)
    if q <= atom:
        return 0.0
    a, b = support_edges(law)
    lo, hi = a, b
    for _ in range(_QUANTILE_MAX_ITER):
        mid = (lo + hi) / 2.0
        if cdf(law, mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < _QUANTILE_XTOL:
            return (lo + hi) / 2.0
    raise NumericError(
        f"quantile bisection did not reach xtol={_QUANTILE_XTOL} "
        f"within {_QUANTILE_MAX_ITER} iterations"
    )


@lru_cache(maxsize=None)
def _unit_median(c: float) -> float:
    return quantile(MpLaw(c, 1.0), 0.5)


def median(law: MpLaw) -> float:
    """Median of the law. Quantiles scale linearly in sigma2."""
    return law.sigma2 * _unit_median(law.c)


def log_moment(c: float) -> float:
    """Mean of log(x) under the unit-scale law: ((c-1)/c) log(1-c) - 1.

    Defined for 0 < c < 1; tends to 0 as c -> 0+ (series -c/2 - c^2/6 - ...).
    """
    if not 0.0 < c < 1.0:
        raise InputError(f"log moment requires 0 < c < 1, got c={c}")
    return (c - 1.0) / c * math.log1p(-c) - 1.0
