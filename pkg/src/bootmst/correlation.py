"""Pearson correlation, the MST metric, spectra and PSD repair."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import ReturnsPanel
from .exceptions import PanelError

__all__ = [
    "CorrelationMatrix",
    "Spectrum",
    "pearson",
    "pearson_array",
    "to_distance",
    "spectrum",
    "shrink_to_psd",
    "write_matrix",
]

ENTRY_TOL = 1e-12
DEFAULT_FLOOR = 1e-10
SHRINK_MARGIN = 1e-12


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric, unit-diagonal matrix with entries in [-1, 1].

    ``min_eigenvalue`` is filled in once the spectrum has been checked.
    """

    values: np.ndarray
    min_eigenvalue: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"correlation matrix must be square, got {v.shape}")
        if not np.array_equal(v, v.T):
            raise ValueError("correlation matrix is not symmetric")
        if not np.all(np.diag(v) == 1.0):
            raise ValueError("correlation matrix must have unit diagonal")
        if np.any(np.abs(v) > 1 + ENTRY_TOL) or not np.all(np.isfinite(v)):
            raise ValueError("correlation entries must lie in [-1, 1]")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def psd_checked(self) -> bool:
        return self.min_eigenvalue is not None

    def with_min_eigenvalue(self) -> "CorrelationMatrix":
        lam = float(spectrum(self).eigenvalues[0])
        return CorrelationMatrix(self.values, lam)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.eigenvalues < 0))

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])


def _symmetrize_unit(c: np.ndarray) -> np.ndarray:
    c = np.clip(c, -1.0, 1.0)
    upper = np.triu(c, 1)
    out = upper + upper.T
    np.fill_diagonal(out, 1.0)
    return out


def pearson_array(X: np.ndarray) -> np.ndarray:
    """Sample Pearson matrix of the rows of ``X`` (n x T), as a plain array."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if np.any(np.ptp(X, axis=1) == 0):
        raise PanelError("zero variance element in correlation input")
    return _pearson_rows(X)


def _pearson_rows(X: np.ndarray) -> np.ndarray:
    # fixed memory order keeps BLAS results identical across callers
    Z = np.ascontiguousarray(X)
    Z = Z - Z.mean(axis=1, keepdims=True)
    Z /= np.sqrt(np.einsum("ij,ij->i", Z, Z))[:, None]
    return _symmetrize_unit(Z @ Z.T)


def pearson(panel: ReturnsPanel | np.ndarray) -> CorrelationMatrix:
    X = panel.observations if isinstance(panel, ReturnsPanel) else panel
    return CorrelationMatrix(pearson_array(X))


def _values(corr) -> np.ndarray:
    return corr.values if isinstance(corr, CorrelationMatrix) else np.asarray(corr, dtype=np.float64)


def to_distance(corr) -> np.ndarray:
    """``d = sqrt(2 (1 - rho))``, zero diagonal, values in [0, 2]."""
    rho = _values(corr)
    d = np.sqrt(np.clip(2.0 * (1.0 - rho), 0.0, 4.0))
    np.fill_diagonal(d, 0.0)
    return d


def spectrum(corr) -> Spectrum:
    """All eigenvalues of a symmetric matrix, ascending (LAPACK ``syevd``)."""
    return Spectrum(np.linalg.eigvalsh(_values(corr)))


def shrink_to_psd(corr, floor: float = DEFAULT_FLOOR) -> tuple[CorrelationMatrix, float]:
    """Blend towards the identity just enough to lift the smallest eigenvalue.

    Returns ``((1 - alpha) C + alpha I, alpha)`` with the smallest
    ``alpha`` in [0, 1] such that the minimum eigenvalue is at least ``floor``
    (up to a 1e-12 margin against rounding).
    """
    if floor < 0:
        raise ValueError("floor must be non-negative")
    C = _values(corr)
    lam = float(np.linalg.eigvalsh(C)[0])
    if lam >= floor:
        return CorrelationMatrix(C, lam), 0.0
    if lam >= 1.0 or floor > 1.0:
        raise ValueError(f"cannot shrink: smallest eigenvalue {lam:g}, floor {floor:g}")
    # aim slightly above the floor so rounding cannot leave us below it
    target = floor + SHRINK_MARGIN
    for _ in range(8):
        alpha = min(1.0, (target - lam) / (1.0 - lam))
        out = _symmetrize_unit((1.0 - alpha) * C + alpha * np.eye(len(C)))
        got = spectrum(out).min
        if got >= floor:
            return CorrelationMatrix(out, got), alpha
        target += floor - got + SHRINK_MARGIN
    raise ValueError(f"shrinkage did not reach floor {floor:g}")


def write_matrix(corr, path, labels) -> None:
    """Square CSV with identifiers on both margins, 17 significant digits."""
    C = _values(corr)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *labels])
        for label, row in zip(labels, C):
            w.writerow([label, *(f"{v:.17g}" for v in row)])


def read_matrix(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    labels = rows[0][1:]
    return labels, np.array([[float(v) for v in r[1:]] for r in rows[1:]])
