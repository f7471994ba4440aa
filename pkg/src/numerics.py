"""Dense symmetric linear algebra for the corrector: covariance,
eigendecomposition, inverse square root and the Fisher solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateDirectionError,
    InsufficientDataError,
    NumericalError,
    ParameterError,
    SingularityError,
)
from .sampling import PointSet

logger = logging.getLogger("Numerics")

DEFAULT_RIDGE_SCALE = 1e-10


class SymmetricMatrix:
    """Read-only, exactly symmetric d x d matrix."""

    def __init__(self, entries):
        entries = np.array(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ParameterError("entries", f"expected a square matrix, got {entries.shape}")
        if entries.shape[0] < 1:
            raise ParameterError("entries", "matrix order must be >= 1")
        # (a + b) / 2 == (b + a) / 2 bit for bit
        entries = (entries + entries.T) / 2
        entries.setflags(write=False)
        self._entries = entries

    @property
    def entries(self):
        return self._entries

    @property
    def order(self):
        return self._entries.shape[0]

    def trace(self):
        return float(np.trace(self._entries))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries
        return self._entries.astype(dtype)

    def __repr__(self):
        return f"SymmetricMatrix(order={self.order})"


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        h = self.eigenvectors
        return SymmetricMatrix((h * self.eigenvalues) @ h.T)


def _as_symmetric(a):
    if isinstance(a, SymmetricMatrix):
        return a
    return SymmetricMatrix(a)


def default_ridge(a):
    """1e-10 * trace(A) / d, the ridge used whenever a sample covariance is
    inverted without an explicit ridge."""
    a = _as_symmetric(a)
    return DEFAULT_RIDGE_SCALE * max(a.trace(), 0.0) / a.order


def covariance(ps) -> SymmetricMatrix:
    """Unbiased sample covariance (divisor M-1) of the rows."""
    points = ps.points if isinstance(ps, PointSet) else np.atleast_2d(np.asarray(ps, float))
    if points.shape[0] < 2:
        raise InsufficientDataError(2, points.shape[0])
    centered = points - points.mean(axis=0)
    return SymmetricMatrix(centered.T @ centered / (points.shape[0] - 1))


def sym_eig(a) -> EigenDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvectors."""
    a = _as_symmetric(a)
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(a.entries, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(
            "Symmetric eigensolver did not converge",
            {"order": a.order, "reason": str(e)},
        )
    return EigenDecomposition(eigenvalues, eigenvectors)


def inv_sqrt(a, ridge=None) -> SymmetricMatrix:
    """(A + ridge I)^(-1/2) through the PSD branch of the square root."""
    a = _as_symmetric(a)
    if ridge is None:
        ridge = default_ridge(a)
    if ridge < 0:
        raise ParameterError("ridge", "must be >= 0")
    decomposition = sym_eig(a)
    shifted = decomposition.eigenvalues + ridge
    if shifted[0] <= 0:
        raise SingularityError(float(decomposition.eigenvalues[0]), float(ridge))
    h = decomposition.eigenvectors
    return SymmetricMatrix((h / np.sqrt(shifted)) @ h.T)


def fisher_direction(cov_rest, cov_err, mean_err, mean_rest, ridge=None):
    """Unit w solving (cov_rest + cov_err + ridge I) w = mean_err - mean_rest."""
    pooled = SymmetricMatrix(np.asarray(cov_rest) + np.asarray(cov_err))
    difference = np.asarray(mean_err, dtype=float) - np.asarray(mean_rest, dtype=float)
    if difference.shape != (pooled.order,):
        raise ParameterError(
            "mean_err", f"means must have length {pooled.order}, got {difference.shape}"
        )
    if not np.any(difference):
        raise DegenerateDirectionError()
    if ridge is None:
        ridge = default_ridge(pooled)

    system = pooled.entries + ridge * np.eye(pooled.order)
    try:
        w = scipy.linalg.solve(system, difference, assume_a="sym")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(
            "Fisher system is singular after ridge",
            {"order": pooled.order, "ridge": ridge, "reason": str(e)},
        )
    norm = np.linalg.norm(w)
    if not np.isfinite(norm) or norm == 0:
        raise NumericalError("Fisher solve produced no direction", {"norm": norm})
    return w / norm
