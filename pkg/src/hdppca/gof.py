"""Goodness-of-fit tests for the isotropic-noise hypothesis with m spikes.

Two routes from the same log-eigenvalue statistic

    L* = sum_{j>m} log(lambda_j / mle_sigma2) <= 0:

* ``bartlett_lrt``: the classical correction -(n - (2p+11)/6 - 2m/3) L*
  against a chi-square with q = p(p+1)/2 + m(m-1)/2 - pm - 1 degrees of
  freedom (valid only when p stays small relative to n);
* ``clrt``: L* recentered and rescaled with the proportional-dimension
  limit terms so the standardized statistic is asymptotically N(0, 1),
  with every unknown replaced by its bias-corrected plug-in.

Both require c_n = p/(n-1) < 1 so the noise eigenvalues stay positive.
"""

import math

import numpy as np
from dataclasses import dataclass
from scipy.special import gammaincc, ndtr, ndtri

from . import mp
from .data import Spectrum
from .errors import InputError, NumericError, RegimeError
from .variance import mle_sigma2, star_sigma2
from .spiked import estimate_spikes


@dataclass
class GofReport:
    """Corrected and classical test results plus the plug-in terms."""

    l_star: float
    delta_n: float
    p_value_clrt: float
    reject: bool
    alpha_level: float
    t_bartlett: float
    df: int
    p_value_lrt: float
    terms: dict


def _check_regime(spec: Spectrum) -> None:
    if spec.c_n >= 1:
        raise RegimeError(
            f"log-eigenvalue tests need c_n = p/(n-1) < 1, got {spec.c_n:.4g}"
        )


def l_star(spec: Spectrum, m: int) -> float:
    """Sum of log(lambda_j / mle) over the noise eigenvalues; <= 0 by Jensen."""
    _check_regime(spec)
    noise = spec.eigenvalues[m:]
    if np.any(noise <= 0):
        raise NumericError("non-positive noise eigenvalue; test undefined")
    sigma2 = mle_sigma2(spec, m).value
    return float(np.sum(np.log(noise / sigma2)))


def chi2_tail(x: float, df: float) -> float:
    """Upper chi-square tail via the regularized incomplete gamma function."""
    if df <= 0:
        raise InputError(f"degrees of freedom must be positive, got {df}")
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def bartlett_lrt(spec: Spectrum, m: int):
    """Bartlett-corrected statistic, its degrees of freedom, and the p-value."""
    _check_regime(spec)
    p, n = spec.p, spec.n
    q = p * (p + 1) // 2 + m * (m - 1) // 2 - p * m - 1
    if q < 1:
        raise InputError(f"over-parameterized test: q={q} < 1 for p={p}, m={m}")
    statistic = -(n - (2 * p + 11) / 6.0 - 2 * m / 3.0) * l_star(spec, m)
    return statistic, q, chi2_tail(statistic, q)


def clrt(spec: Spectrum, m: int, alpha_level: float = 0.05,
         on_sub_edge: str = "error") -> GofReport:
    """Corrected likelihood ratio test; rejects when the standardized
    statistic exceeds the upper-alpha normal quantile.

    All plug-ins use the bias-corrected variance estimate and the spikes
    re-inverted at it, with every limit term evaluated at c_n.
    """
    if not 0.0 < alpha_level < 1.0:
        raise InputError(f"test level must be in (0, 1), got {alpha_level}")
    _check_regime(spec)
    p, c_n = spec.p, spec.c_n
    ls = l_star(spec, m)

    s2_star = star_sigma2(spec, m, on_sub_edge=on_sub_edge).value
    alpha_hats = estimate_spikes(spec, m, s2_star, on_sub_edge=on_sub_edge).alpha_hats

    if m:
        eta = float(np.sum(np.log1p(c_n * s2_star / alpha_hats)))
        spike_sum = m + s2_star * float(np.sum(1.0 / alpha_hats))
    else:
        eta = 0.0
        spike_sum = 0.0
    beta = 1.0 - c_n * spike_sum / (p - m)
    if beta <= 0:
        raise NumericError(f"plug-in beta={beta:.4g} is non-positive; estimates corrupted")
    v_hat = -2.0 * math.log1p(-c_n) + 2.0 * c_n / beta * (1.0 / beta - 2.0)
    if v_hat <= 0:
        raise NumericError(f"plug-in variance v={v_hat:.4g} is non-positive")
    center = math.log1p(-c_n) / 2.0
    h_cn = mp.log_moment(c_n)

    delta_n = (ls - center - p * h_cn - eta + (p - m) * math.log(beta)) / math.sqrt(v_hat)
    p_value = float(ndtr(-delta_n))
    reject = delta_n > float(ndtri(1.0 - alpha_level))

    t_bartlett, df, p_value_lrt = bartlett_lrt(spec, m)
    return GofReport(
        l_star=ls,
        delta_n=float(delta_n),
        p_value_clrt=p_value,
        reject=bool(reject),
        alpha_level=alpha_level,
        t_bartlett=float(t_bartlett),
        df=df,
        p_value_lrt=float(p_value_lrt),
        terms={
            "center": center,
            "log_moment": h_cn,
            "eta": eta,
            "beta": beta,
            "v": v_hat,
            "sigma2_star": s2_star,
        },
    )
