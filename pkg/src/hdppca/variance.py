"""Noise-variance estimators for the isotropic-noise factor model.

Five estimators share one result type:

* ``mle_sigma2``    - average of the p - m trailing eigenvalues,
* ``star_sigma2``   - the MLE plus its spike-driven bias correction,
* ``kn_sigma2``     - joint solution of the Kritchman-Nadler system,
* ``us_sigma2``     - median noise eigenvalue over the law median (Ulfarsson-Solo),
* ``median_sigma2`` - median per-column mean square (Johnstone-Lu).
"""

import math

import numpy as np
from dataclasses import dataclass, field

from . import mp
from .data import DataMatrix, Spectrum
from .errors import ConvergenceError, InputError, NumericError
from .spiked import bias_term, estimate_spikes

_KN_TOL = 1e-10
_KN_MAX_ITER = 200


@dataclass
class VarianceEstimate:
    """An estimated noise variance with its method tag and diagnostics."""

    value: float
    method: str
    m_used: int
    se: float | None = None
    iterations: int | None = None
    diagnostics: dict = field(default_factory=dict)


def classical_se(sigma2: float, p: int, m: int, n: int) -> float:
    """Classical low-dimensional standard error sigma2 sqrt(2/(p-m)) / sqrt(n)."""
    return sigma2 * math.sqrt(2.0 / (p - m)) / math.sqrt(n)


def _check_m(spec: Spectrum, m: int) -> None:
    if m < 0 or m >= min(spec.p, spec.n - 1):
        raise InputError(f"need 0 <= m < min(p, n-1) = {min(spec.p, spec.n - 1)}, got m={m}")


def mle_sigma2(spec: Spectrum, m: int) -> VarianceEstimate:
    """Average of the trailing p - m eigenvalues (the Gaussian MLE)."""
    _check_m(spec, m)
    value = float(np.mean(spec.eigenvalues[m:]))
    return VarianceEstimate(
        value=value,
        method="mle",
        m_used=m,
        se=classical_se(value, spec.p, m, spec.n),
    )


def star_sigma2(spec: Spectrum, m: int, on_sub_edge: str = "error") -> VarianceEstimate:
    """Bias-corrected estimator: MLE plus b(MLE) * MLE * sqrt(2 c_n) / (p - m).

    The spike estimates feeding the bias functional are inverted at the MLE
    itself (one-step plug-in), not re-iterated at the corrected value.
    """
    base = mle_sigma2(spec, m)
    c_n = spec.c_n
    hats = estimate_spikes(spec, m, base.value, on_sub_edge=on_sub_edge)
    b = bias_term(m, hats.alpha_hats, base.value, c_n)
    value = base.value + b * base.value * math.sqrt(2.0 * c_n) / (spec.p - m)
    diagnostics = {}
    if hats.clamped:
        diagnostics["clamped_indices"] = hats.clamped
    return VarianceEstimate(
        value=value,
        method="star",
        m_used=m,
        se=value * math.sqrt(2.0 * c_n) / (spec.p - m),
        diagnostics=diagnostics,
    )


def _kn_rho(lam: float, sigma2: float, shrink: float, on_negative_disc: str):
    """Larger root of rho^2 - rho (lam + sigma2 - sigma2 * shrink) + lam sigma2 = 0."""
    b = lam + sigma2 - sigma2 * shrink
    disc = b * b - 4.0 * lam * sigma2
    if disc < 0:
        if on_negative_disc == "error":
            return None
        disc = 0.0
    return (b + math.sqrt(disc)) / 2.0


def kn_sigma2(spec: Spectrum, m: int,
              on_negative_discriminant: str = "error") -> VarianceEstimate:
    """Fixed-point solution of the Kritchman-Nadler system.

    Starting from the MLE, alternates the per-spike quadratic for rho_j with
    the variance update until |delta sigma2| < 1e-10 (absolute or relative).
    ``on_negative_discriminant="clamp"`` replaces a negative discriminant by
    zero instead of failing, recording how many roots were clamped.
    """
    if on_negative_discriminant not in ("error", "clamp"):
        raise InputError(f"unknown mode {on_negative_discriminant!r}")
    if m < 1:
        raise InputError("Kritchman-Nadler estimation needs m >= 1")
    _check_m(spec, m)
    eigs = spec.eigenvalues
    noise_sum = float(np.sum(eigs[m:]))
    shrink = (spec.p - m) / spec.n
    sigma2 = float(np.mean(eigs[m:]))
    clamped = 0
    iterations = 0
    for iterations in range(1, _KN_MAX_ITER + 1):
        rhos = []
        clamped = 0
        for j in range(m):
            rho = _kn_rho(eigs[j], sigma2, shrink, on_negative_discriminant)
            if rho is None:
                raise NumericError(
                    f"negative discriminant for spike index {j}: eigenvalue "
                    f"{eigs[j]:.6g} is too close to the bulk at sigma2={sigma2:.6g}"
                )
            b = eigs[j] + sigma2 - sigma2 * shrink
            if b * b - 4.0 * eigs[j] * sigma2 < 0:
                clamped += 1
            rhos.append(rho)
        new_sigma2 = (noise_sum + float(np.sum(eigs[:m] - np.array(rhos)))) / (spec.p - m)
        delta = abs(new_sigma2 - sigma2)
        sigma2 = new_sigma2
        if delta < _KN_TOL or delta < _KN_TOL * abs(sigma2):
            break
    else:
        raise ConvergenceError(
            f"Kritchman-Nadler iteration did not converge in {_KN_MAX_ITER} steps",
            residual=delta,
            iterations=_KN_MAX_ITER,
        )
    diagnostics = {"residual": kn_residual(spec, m, sigma2)}
    if clamped:
        diagnostics["clamped_discriminants"] = clamped
    return VarianceEstimate(
        value=sigma2,
        method="kn",
        m_used=m,
        iterations=iterations,
        diagnostics=diagnostics,
    )


def kn_residual(spec: Spectrum, m: int, sigma2: float) -> float:
    """Absolute residual of the variance equation at a candidate solution."""
    eigs = spec.eigenvalues
    shrink = (spec.p - m) / spec.n
    rhos = np.array([
        _kn_rho(eigs[j], sigma2, shrink, "clamp") for j in range(m)
    ])
    rhs = (float(np.sum(eigs[m:])) + float(np.sum(eigs[:m] - rhos))) / (spec.p - m)
    return abs(sigma2 - rhs)


def us_sigma2(spec: Spectrum, m: int) -> VarianceEstimate:
    """Median of the noise eigenvalues over the unit-scale law median at c = p/n."""
    _check_m(spec, m)
    law_median = mp.median(mp.MpLaw(spec.p / spec.n, 1.0))
    value = float(np.median(spec.eigenvalues[m:])) / law_median
    return VarianceEstimate(value=value, method="us", m_used=m,
                            diagnostics={"law_median": law_median})


def median_sigma2(data: DataMatrix) -> VarianceEstimate:
    """Median of the p per-column mean squares, after centering each column.

    The estimator assumes centered data; centering here is a safeguard and is
    noted in the diagnostics so silent miscentering cannot bias the result.
    """
    centered = data.values - data.values.mean(axis=0)
    mean_squares = np.mean(centered ** 2, axis=0)
    return VarianceEstimate(
        value=float(np.median(mean_squares)),
        method="median",
        m_used=0,
        diagnostics={"columns_centered": True},
    )
