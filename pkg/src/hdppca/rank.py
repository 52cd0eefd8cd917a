"""Principal-component-count selection: the unbiased-risk criterion and the
six panel information criteria with their bias-corrected variants.

``sure`` scans m = 0..m_max and scores each candidate by an unbiased estimate
of the mean-reconstruction risk; ``bai_ng`` scans m = 1..m_max with penalties
on both panel dimensions.  The starred variants of both replace the authors'
noise-variance plug-in by the bias-corrected estimator.
"""

import math

import numpy as np
from dataclasses import dataclass

from .data import DataMatrix, Spectrum, spectrum
from .errors import InputError, NumericError
from .variance import star_sigma2, us_sigma2

_TIE_TOL = 1e-12
_DISTINCT_TOL = 1e-12


@dataclass
class RankReport:
    """Criterion values over a candidate grid and the argmin selection."""

    criterion: str
    m_grid: np.ndarray
    values: np.ndarray
    selected_m: int
    m_max: int
    sigma2_used: np.ndarray | float | None = None


def _argmin_small_ties(m_grid, values) -> int:
    """Argmin with ties within 1e-12 broken toward the smaller candidate."""
    vmin = np.min(values)
    tol = _TIE_TOL * max(1.0, abs(vmin))
    return int(m_grid[np.flatnonzero(values <= vmin + tol)[0]])


def _sure_value(eigs, p, n, m, s2):
    """Unbiased risk value at candidate m with noise-variance plug-in s2."""
    s4 = s2 * s2
    w = 1.0 - 1.0 / n
    lead = eigs[:m]
    inv_sum = float(np.sum(1.0 / lead)) if m else 0.0
    value = (
        (p - m) * s2
        + s4 * inv_sum
        + 2.0 * s2 * w * m
        - 2.0 * s4 * w * inv_sum
        + 4.0 * w * s4 / n * inv_sum
    )
    # interaction term across the spike/noise split
    if m and m < p:
        diffs = lead[:, None] - eigs[None, m:]
        if np.min(np.abs(diffs)) < _DISTINCT_TOL * eigs[0]:
            raise NumericError(
                f"near-equal eigenvalues across the m={m} split make the "
                "risk's interaction term degenerate"
            )
        cross = float(np.sum((lead[:, None] - s2) / diffs))
    else:
        cross = 0.0
    one_minus = float(np.sum(1.0 - s2 / lead)) if m else 0.0
    value += (
        4.0 * w * s2 / n * cross
        + 2.0 * w * s2 / n * m * (m - 1)
        - 2.0 * w * s2 / n * (p - 1) * one_minus
    )
    return value


def sure(spec: Spectrum, m_max: int, variant: str = "star") -> RankReport:
    """Scan m = 0..m_max and select the risk minimizer.

    ``variant="us"`` plugs in the median-eigenvalue estimator, ``"star"`` the
    bias-corrected one; both are recomputed at every candidate m since the
    noise estimate depends on which eigenvalues are counted as signal.
    """
    if variant not in ("us", "star"):
        raise InputError(f"unknown variant {variant!r}")
    if m_max < 0 or m_max >= min(spec.p, spec.n - 1):
        raise InputError(f"need 0 <= m_max < min(p, n-1), got m_max={m_max}")
    eigs = spec.eigenvalues
    m_grid = np.arange(m_max + 1)
    values = np.empty(m_max + 1)
    sigma2_used = np.empty(m_max + 1)
    for m in m_grid:
        if variant == "us":
            s2 = us_sigma2(spec, m).value
        else:
            # candidate m beyond the detectable spikes is scored, not refused:
            # sub-edge eigenvalues invert at the detectability boundary
            s2 = star_sigma2(spec, m, on_sub_edge="clamp").value
        sigma2_used[m] = s2
        values[m] = _sure_value(eigs, spec.p, spec.n, m, s2)
    return RankReport(
        criterion="sure_star" if variant == "star" else "sure",
        m_grid=m_grid,
        values=values,
        selected_m=_argmin_small_ties(m_grid, values),
        m_max=m_max,
        sigma2_used=sigma2_used,
    )


def _centered_gram_eigs(data: DataMatrix) -> np.ndarray:
    """Descending eigenvalues of X_c' X_c for column-centered X (via the smaller Gram)."""
    x = data.values - data.values.mean(axis=0)
    n, p = x.shape
    gram = x.T @ x if p <= n else x @ x.T
    eigs = np.linalg.eigvalsh((gram + gram.T) / 2.0)[::-1]
    return np.clip(eigs, 0.0, None)


def v_statistic(data: DataMatrix, m: int) -> float:
    """Mean squared residual after the best rank-m fit of the centered data.

    Equals the sum of all but the m largest eigenvalues of X'X/(NT).
    """
    n_series = data.p
    n_periods = data.n
    if m < 1 or m >= min(n_series, n_periods):
        raise InputError(f"need 1 <= m < min(N, T), got m={m}")
    eigs = _centered_gram_eigs(data)
    return float(np.sum(eigs[m:])) / (n_series * n_periods)


_PENALTY_NAMES = ("1", "2", "3")


def _bai_ng_penalties(n_series: int, n_periods: int, m_grid: np.ndarray):
    """The three penalty shapes, each as an array over the candidate grid."""
    k1 = (n_series + n_periods) / (n_series * n_periods)
    c2 = min(n_series, n_periods)
    return (
        m_grid * k1 * math.log(1.0 / k1),
        m_grid * k1 * math.log(c2),
        m_grid * math.log(c2) / c2,
    )


def bai_ng(data: DataMatrix, m_max: int = 8, family: str = "pcp",
           variant: str = "plain") -> dict:
    """The three criteria of one family over m = 1..m_max, as named reports.

    ``family="pcp"`` penalizes the residual statistic itself and scales the
    penalty by a noise-variance estimate: the residual statistic at m_max for
    ``variant="plain"``, the bias-corrected estimator at m_max for ``"star"``.
    ``family="icp"`` penalizes the log residual; its penalty carries no
    variance scale, so its starred variant coincides with the plain one.
    """
    if family not in ("pcp", "icp"):
        raise InputError(f"unknown family {family!r}")
    if variant not in ("plain", "star"):
        raise InputError(f"unknown variant {variant!r}")
    n_series, n_periods = data.p, data.n
    if m_max < 1 or m_max >= min(n_series, n_periods):
        raise InputError(f"need 1 <= m_max < min(N, T), got m_max={m_max}")
    eigs = _centered_gram_eigs(data)
    total = float(np.sum(eigs))
    m_grid = np.arange(1, m_max + 1)
    v_values = (total - np.cumsum(eigs[:m_max])) / (n_series * n_periods)
    v_values = np.clip(v_values, 0.0, None)

    if family == "pcp" and variant == "star":
        scale = star_sigma2(spectrum(data), m_max, on_sub_edge="clamp").value
    else:
        scale = v_statistic(data, m_max)

    penalties = _bai_ng_penalties(n_series, n_periods, m_grid)
    reports = {}
    for name, penalty in zip(_PENALTY_NAMES, penalties):
        if family == "pcp":
            values = v_values + scale * penalty
        else:
            with np.errstate(divide="ignore"):
                values = np.log(v_values) + penalty
        tag = f"{family}{name}" + ("_star" if variant == "star" else "")
        reports[f"{family}{name}"] = RankReport(
            criterion=tag,
            m_grid=m_grid,
            values=values,
            selected_m=_argmin_small_ties(m_grid, values),
            m_max=m_max,
            sigma2_used=scale if family == "pcp" else None,
        )
    return reports
