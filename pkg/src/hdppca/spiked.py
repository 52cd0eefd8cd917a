"""Spiked-population machinery: eigenvalue maps, spike recovery, bias term.

A population covariance sigma2 * diag(a1*, ..., am*, 1, ..., 1) with every
a* > 1 + sqrt(c) sends its k-th leading sample eigenvalue to the almost-sure
limit sigma2 * phi(a*_k), where

    phi(a) = a + c a / (a - 1).

Inverting phi at an observed eigenvalue recovers the spike; the sum
sqrt(c/2) (m + sigma2 sum_i 1/alpha_i) is the normalized downward bias the
maximum-likelihood noise-variance estimator incurs from those spikes.
"""

import math
import warnings

import numpy as np
from dataclasses import dataclass

from .data import Spectrum
from .errors import InputError, SubEdgeError


@dataclass(frozen=True)
class SpikedModelSpec:
    """Ground truth for a spiked covariance: distinct spikes, multiplicities, noise."""

    alphas: tuple
    mults: tuple
    sigma2: float
    p: int
    n: int

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        mults = tuple(int(k) for k in self.mults)
        if len(alphas) != len(mults):
            raise InputError("alphas and mults must have equal length")
        if any(a <= 0 for a in alphas):
            raise InputError("spike values must be positive")
        if any(b >= a for a, b in zip(alphas, alphas[1:])):
            raise InputError("spike values must be strictly decreasing")
        if any(k < 1 for k in mults):
            raise InputError("multiplicities must be >= 1")
        if not self.sigma2 > 0:
            raise InputError("sigma2 must be positive")
        if sum(mults) >= self.p:
            raise InputError(f"need m < p, got m={sum(mults)}, p={self.p}")
        if self.n < 2:
            raise InputError("need n >= 2")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "mults", mults)

    @property
    def m(self) -> int:
        return sum(self.mults)

    def spike_values(self) -> np.ndarray:
        """The m spikes repeated by multiplicity, descending."""
        return np.repeat(self.alphas, self.mults)

    def population_spectrum(self) -> np.ndarray:
        """All p population eigenvalues, descending: spikes + sigma2, then sigma2."""
        out = np.full(self.p, self.sigma2)
        out[: self.m] += self.spike_values()
        return out


@dataclass(frozen=True)
class SpikeEstimates:
    """Per-eigenvalue spike estimates; ``clamped`` lists indices (0-based) that
    sat at/below the bulk edge and were pinned to the detectability boundary."""

    alpha_hats: np.ndarray
    m: int
    clamped: tuple = ()

    def __post_init__(self):
        hats = np.asarray(self.alpha_hats, dtype=float)
        if len(hats) != self.m:
            raise InputError("alpha_hats must have length m")
        if self.m and not np.all(np.isfinite(hats) & (hats > 0)):
            raise InputError("spike estimates must be finite and positive")
        object.__setattr__(self, "alpha_hats", hats)


def phi(alpha_star: float, c: float) -> float:
    """phi(a) = a + c a / (a - 1), the spike-to-sample-eigenvalue map."""
    if alpha_star == 1.0:
        raise InputError("phi has a pole at alpha_star = 1")
    return alpha_star + c * alpha_star / (alpha_star - 1.0)


def is_detectable(alpha: float, sigma2: float, c: float) -> bool:
    """Whether a spike separates from the bulk: alpha > sigma2 sqrt(c), strictly."""
    return alpha > sigma2 * math.sqrt(c)


def spike_limit(alpha: float, sigma2: float, c: float) -> float:
    """Almost-sure sample-eigenvalue limit alpha + sigma2 + sigma2 c (1 + sigma2/alpha).

    Warns for sub-critical spikes (alpha <= sigma2 sqrt(c)), whose sample
    eigenvalue actually sticks to the bulk edge instead.
    """
    if not is_detectable(alpha, sigma2, c):
        warnings.warn(
            f"spike alpha={alpha} is not detectable at sigma2={sigma2}, c={c}; "
            "its sample eigenvalue converges to the bulk edge",
            stacklevel=2,
        )
    return alpha + sigma2 + sigma2 * c * (1.0 + sigma2 / alpha)


def bulk_edge(sigma2: float, c: float) -> float:
    """Upper edge of the noise bulk: sigma2 (1 + sqrt(c))^2."""
    return sigma2 * (1.0 + math.sqrt(c)) ** 2


def invert_phi(lam: float, sigma2: float, c: float) -> float:
    """Recover the spike alpha whose sample eigenvalue limit is ``lam``.

    Solves phi(a*) = lam/sigma2 for the larger root of
    a^2 + (c - 1 - psi) a + psi = 0 and returns sigma2 (a* - 1).  Requires
    ``lam`` strictly above the bulk edge.
    """
    psi = lam / sigma2
    if psi <= (1.0 + math.sqrt(c)) ** 2:
        raise SubEdgeError(
            f"eigenvalue {lam:.6g} is not above the bulk edge "
            f"{bulk_edge(sigma2, c):.6g}"
        )
    half_sum = (psi + 1.0 - c) / 2.0
    disc = half_sum * half_sum - psi
    alpha_star = half_sum + math.sqrt(disc)
    return sigma2 * (alpha_star - 1.0)


def estimate_spikes(spec: Spectrum, m: int, sigma2: float,
                    on_sub_edge: str = "error") -> SpikeEstimates:
    """Invert phi at the m leading eigenvalues of ``spec`` with c = p/(n-1).

    ``on_sub_edge`` controls eigenvalues at/below the bulk edge: ``"error"``
    raises listing the offending indices; ``"clamp"`` pins their spike
    estimate to the detectability boundary sigma2 sqrt(c) and records the
    indices, keeping long Monte-Carlo runs alive without hiding the event.
    """
    if on_sub_edge not in ("error", "clamp"):
        raise InputError(f"unknown on_sub_edge mode {on_sub_edge!r}")
    if m < 0 or m >= min(spec.p, spec.n - 1):
        raise InputError(f"need 0 <= m < min(p, n-1), got m={m}")
    if m == 0:
        return SpikeEstimates(alpha_hats=np.empty(0), m=0)
    c = spec.c_n
    edge = bulk_edge(sigma2, c)
    leading = spec.eigenvalues[:m]
    offending = [j for j, lam in enumerate(leading) if lam <= edge]
    if offending and on_sub_edge == "error":
        raise SubEdgeError(
            f"leading eigenvalues at indices {offending} are at/below the "
            f"bulk edge {edge:.6g} for sigma2={sigma2:.6g}",
            indices=offending,
        )
    boundary = sigma2 * math.sqrt(c)
    hats = np.array([
        boundary if lam <= edge else invert_phi(lam, sigma2, c)
        for lam in leading
    ])
    return SpikeEstimates(alpha_hats=hats, m=m, clamped=tuple(offending))


def bias_term(m: int, alphas, sigma2: float, c: float) -> float:
    """sqrt(c/2) (m + sigma2 sum_i 1/alpha_i); zero when m = 0."""
    alphas = np.asarray(alphas, dtype=float)
    if len(alphas) != m:
        raise InputError("alphas must have length m")
    if m == 0:
        return 0.0
    if np.any(alphas <= 0):
        raise InputError("spike values must be positive")
    return math.sqrt(c / 2.0) * (m + sigma2 * float(np.sum(1.0 / alphas)))
