"""Dense matrix primitives: norms, SVD, statistical dimension, augmentation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyError, ShapeError

_RANK_TOL = 1e-12


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float array, rejecting empty or non-finite input."""
    M = np.asarray(values, dtype=float)
    if M.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={M.ndim}")
    if M.size == 0:
        raise ShapeError(f"{name} must be non-empty")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return M


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float array, rejecting empty or non-finite input."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got ndim={v.ndim}")
    if v.size == 0:
        raise ShapeError(f"{name} must be non-empty")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True)
class RegressionInstance:
    """A design matrix paired with a response vector.

    Tallness (n >= d) is not required here; operations that need it, such as
    basis construction and leverage scores, check it themselves.
    """

    design: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        design = as_matrix(self.design, "design")
        response = as_vector(self.response, "response")
        if design.shape[0] != response.shape[0]:
            raise ShapeError(
                f"design has {design.shape[0]} rows but response has "
                f"{response.shape[0]} entries"
            )
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "response", response)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def d(self) -> int:
        return self.design.shape[1]


def augment(instance: RegressionInstance) -> np.ndarray:
    """Return [A  b]: the response glued on as an extra trailing column."""
    return np.hstack([instance.design, instance.response[:, None]])


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD factors: left (n x d), singular_values (d,), right (d x d)."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


def svd(M) -> SvdResult:
    """Thin SVD of a tall matrix, singular values in descending order."""
    M = as_matrix(M)
    n, d = M.shape
    if n < d:
        raise ShapeError(f"svd expects a tall matrix, got {n}x{d}")
    left, sigma, vt = np.linalg.svd(M, full_matrices=False)
    return SvdResult(left=left, singular_values=sigma, right=vt.T)


def entrywise_p_norm(M, p: float) -> float:
    """(sum_ij |M_ij|^p)^(1/p) for p >= 1."""
    M = as_matrix(M)
    if not np.isfinite(p) or p < 1:
        raise ValueError(f"p must be a finite real >= 1, got {p}")
    return float(np.sum(np.abs(M) ** p) ** (1.0 / p))


def induced_norm_upper(M, p: float) -> float:
    """Upper bound on the operator norm sup_x ||Mx||_p / ||x||_p.

    Exact for p in {1, 2, inf} (max column sum, top singular value, max row
    sum).  Other p use the interpolation bound
    ||M||_1^(1/p) * ||M||_inf^(1-1/p), which always dominates the true norm.
    """
    M = as_matrix(M)
    if p != np.inf and (not np.isfinite(p) or p < 1):
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    col_sum = float(np.max(np.sum(np.abs(M), axis=0)))
    row_sum = float(np.max(np.sum(np.abs(M), axis=1)))
    if p == 1:
        return col_sum
    if p == np.inf:
        return row_sum
    if p == 2:
        return float(np.linalg.svd(M, compute_uv=False)[0])
    return float(col_sum ** (1.0 / p) * row_sum ** (1.0 - 1.0 / p))


def statistical_dimension(singular_values, lam: float) -> float:
    """sum_j 1 / (1 + lam / sigma_j^2); equals the rank when lam = 0."""
    sigma = as_vector(singular_values, "singular_values")
    if np.any(sigma <= 0):
        raise RankDeficiencyError("all singular values must be positive")
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    return float(np.sum(1.0 / (1.0 + lam / sigma**2)))


def check_full_column_rank(sigma: np.ndarray, what: str = "matrix") -> None:
    """Raise RankDeficiencyError when the smallest singular value vanishes."""
    if sigma.size == 0 or sigma[-1] <= sigma[0] * _RANK_TOL:
        raise RankDeficiencyError(f"{what} is rank deficient")
