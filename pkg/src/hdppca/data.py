"""Data matrices, the sample covariance and its eigendecomposition.

Every downstream routine consumes either a :class:`DataMatrix` (raw
observations, one per row) or a :class:`Spectrum` (descending eigenvalues of
the sample covariance together with the (p, n) they came from).
"""

import csv

import numpy as np
from dataclasses import dataclass

from .errors import InputError, NumericError

# Round-off negatives larger than this fraction of the top eigenvalue mean a
# broken solver, not noise.
_NEG_EIG_TOL = 1e-10


@dataclass(frozen=True)
class DataMatrix:
    """n observations (rows) of a p-dimensional vector (columns)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InputError(f"data must be a 2-D array, got ndim={values.ndim}")
        n, p = values.shape
        if n < 2:
            raise InputError(f"need at least 2 observations, got n={n}")
        if p < 1:
            raise InputError("need at least one column")
        if not np.all(np.isfinite(values)):
            raise InputError("data contains non-finite entries")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues of a sample covariance, with its (p, n).

    The descending order is part of the contract: downstream code indexes the
    k-th largest eigenvalue as ``eigenvalues[k - 1]``.
    """

    eigenvalues: np.ndarray
    p: int
    n: int

    def __post_init__(self):
        eigs = np.asarray(self.eigenvalues, dtype=float)
        if eigs.ndim != 1 or len(eigs) != self.p:
            raise InputError("eigenvalues must be a vector of length p")
        if self.n < 2:
            raise InputError(f"need n >= 2, got n={self.n}")
        if np.any(eigs < 0):
            raise InputError("eigenvalues must be non-negative")
        if np.any(np.diff(eigs) > 0):
            raise InputError("eigenvalues must be sorted non-increasing")
        object.__setattr__(self, "eigenvalues", eigs)

    @property
    def c_n(self) -> float:
        """Dimension-to-sample ratio p/(n-1)."""
        return self.p / (self.n - 1)


def sample_covariance(data: DataMatrix) -> np.ndarray:
    """Sample covariance with the n-1 divisor, symmetrized against round-off."""
    x = data.values
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (data.n - 1)
    return (cov + cov.T) / 2.0


def spectrum(data: DataMatrix) -> Spectrum:
    """Descending eigenvalues of ``sample_covariance(data)``.

    Tiny negative eigenvalues from round-off are clipped to zero; anything
    below ``-1e-10 * lambda_max`` raises, since that indicates a broken
    eigensolver rather than noise.
    """
    cov = sample_covariance(data)
    try:
        eigs = np.linalg.eigvalsh(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    eigs = eigs[::-1]
    lam_max = max(eigs[0], 0.0)
    tol = _NEG_EIG_TOL * lam_max + 1e-300
    if eigs[-1] < -tol:
        raise NumericError(
            f"eigenvalue {eigs[-1]:.6g} is too negative for round-off "
            f"(threshold {-tol:.6g})"
        )
    eigs = np.clip(eigs, 0.0, None)
    return Spectrum(eigenvalues=eigs, p=data.p, n=data.n)


def load_csv(path) -> DataMatrix:
    """Read a comma-separated data matrix, one observation per row.

    A non-numeric first line is treated as a header and skipped.
    """
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                parsed = [float(cell) for cell in row]
            except ValueError as exc:
                if lineno == 1:  # header line
                    continue
                raise InputError(f"{path}: line {lineno}: {exc}") from exc
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise InputError(
                    f"{path}: line {lineno}: expected {width} fields, "
                    f"got {len(parsed)}"
                )
            rows.append(parsed)
    if not rows:
        raise InputError(f"{path}: no numeric rows found")
    return DataMatrix(np.asarray(rows, dtype=float))
