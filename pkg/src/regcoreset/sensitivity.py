"""Per-row sensitivity scores and upper bounds for importance sampling.

The sensitivity of row i of the augmented matrix A' = [A  b] under the
objective ||A'x'||_p^p + lam*||x'||_p^p (x' ranging over all queries) is

    s_i = sup_x' (|a'_i x'|^p + lam*||x'||_p^p / n)
                 / (sum_j |a'_j x'|^p + lam*||x'||_p^p).

Analytic upper bounds come from a well-conditioned basis:
s_i <= beta^p * ||u_i||_p^p / (1 + lam / ||A'||_p^p) + 1/n, where ||A'||_p is
the induced p-norm (an upper bound on it only loosens the score).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conditioning import WellConditionedBasis
from .errors import (
    DimensionTooLargeError,
    InvalidScoresError,
    SchemeMismatchError,
    ShapeError,
)
from .linalg import (
    RegressionInstance,
    as_matrix,
    augment,
    check_full_column_rank,
    induced_norm_upper,
    svd,
)
from .objective import ObjectiveSpec

SCHEME_LP_LP = "lp_lp_bound"
SCHEME_RLAD = "rlad_bound"
SCHEME_MULTIRESPONSE = "multiresponse_rlad_bound"
SCHEME_RIDGE_LEVERAGE = "ridge_leverage"
SCHEME_UNIFORM = "uniform"
SCHEME_BRUTE_FORCE = "brute_force"

SCHEMES = (
    SCHEME_LP_LP,
    SCHEME_RLAD,
    SCHEME_MULTIRESPONSE,
    SCHEME_RIDGE_LEVERAGE,
    SCHEME_UNIFORM,
    SCHEME_BRUTE_FORCE,
)


@dataclass(frozen=True)
class SensitivityScores:
    """Positive per-row scores with their sum and provenance tags.

    info carries scheme-specific extras such as the induced norms that went
    into a bound.
    """

    values: np.ndarray
    scheme: str
    lam: float
    p: float
    total: float = None  # type: ignore[assignment]
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise InvalidScoresError("values must be a non-empty 1-D array")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidScoresError("scores must be finite and positive")
        if self.scheme not in SCHEMES:
            raise InvalidScoresError(f"unknown scheme {self.scheme!r}")
        if self.lam < 0:
            raise InvalidScoresError(f"lam must be >= 0, got {self.lam}")
        total = self.total
        if total is None:
            total = float(values.sum())
        elif abs(total - values.sum()) > 1e-12 * max(abs(total), 1e-30):
            raise InvalidScoresError("total does not match sum of values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "total", float(total))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def uniform_scores(n: int) -> SensitivityScores:
    """Every row scores 1/n; the total is 1 by definition."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return SensitivityScores(
        values=np.full(n, 1.0 / n),
        scheme=SCHEME_UNIFORM,
        lam=0.0,
        p=2.0,
        total=1.0,
    )


def lp_lp_sensitivity_bounds(
    basis: WellConditionedBasis,
    lam: float,
    induced_p_norm_aprime: float,
    n: int,
) -> SensitivityScores:
    """beta^p * ||u_i||_p^p / (1 + lam/||A'||_p^p) + 1/n per row.

    With lam = 0 this is exactly beta^p * ||u_i||_p^p + 1/n.  The total is
    certified against (alpha*beta)^p / (1 + lam/||A'||_p^p) + 1.
    """
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if induced_p_norm_aprime <= 0:
        raise ValueError("induced norm must be positive")
    U = basis.basis
    if U.shape[0] != n:
        raise ShapeError(f"basis has {U.shape[0]} rows, expected {n}")
    p = basis.p
    denom = 1.0 + lam / induced_p_norm_aprime**p
    row_mass = np.sum(np.abs(U) ** p, axis=1)
    values = (basis.beta**p) * row_mass / denom + 1.0 / n
    total = float(values.sum())
    cap = (basis.alpha * basis.beta) ** p / denom + 1.0
    if total > cap * (1 + 1e-9):
        raise InvalidScoresError(
            f"total {total:.6g} exceeds certificate cap {cap:.6g}; "
            "the basis alpha certificate is broken"
        )
    return SensitivityScores(
        values=values,
        scheme=SCHEME_LP_LP,
        lam=lam,
        p=p,
        info={"induced_norm": float(induced_p_norm_aprime)},
    )


def rlad_sensitivity_bounds(
    basis: WellConditionedBasis, lam: float, aprime
) -> SensitivityScores:
    """p = 1 specialization using the exact induced 1-norm (max column sum)."""
    if basis.p != 1:
        raise SchemeMismatchError(f"basis was built for p={basis.p}, need p=1")
    aprime = as_matrix(aprime, "aprime")
    norm1 = induced_norm_upper(aprime, 1)
    scores = lp_lp_sensitivity_bounds(basis, lam, norm1, aprime.shape[0])
    return SensitivityScores(
        values=scores.values,
        scheme=SCHEME_RLAD,
        lam=lam,
        p=1.0,
        info={"induced_norm": norm1},
    )


def multiresponse_rlad_sensitivity_bounds(
    basis: WellConditionedBasis, lam: float, ahat, k: int
) -> SensitivityScores:
    """Bounds for the k-response absolute-deviations objective.

    ahat is the stacked matrix [A  -B].  The denominator uses the induced
    1-norm of the design block A alone; the norm of the full stacked matrix is
    recorded alongside it since the two differ whenever B carries the largest
    column.
    """
    if basis.p != 1:
        raise SchemeMismatchError(f"basis was built for p={basis.p}, need p=1")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ahat = as_matrix(ahat, "ahat")
    n, cols = ahat.shape
    if cols <= k:
        raise ShapeError(f"ahat has {cols} columns, need more than k={k}")
    design_norm = induced_norm_upper(ahat[:, : cols - k], 1)
    scores = lp_lp_sensitivity_bounds(basis, lam, design_norm, n)
    return SensitivityScores(
        values=scores.values,
        scheme=SCHEME_MULTIRESPONSE,
        lam=lam,
        p=1.0,
        info={
            "induced_norm_design": design_norm,
            "induced_norm_stacked": induced_norm_upper(ahat, 1),
        },
    )


def ridge_leverage_scores(aprime, lam: float) -> SensitivityScores:
    """tau_i = a'_i (A'^T A' + lam I)^-1 a'_i via the thin SVD.

    Row i gets sum_j U_ij^2 * sigma_j^2 / (sigma_j^2 + lam); the total equals
    the statistical dimension of A' at lam.  lam = 0 needs full column rank
    and returns ordinary leverage scores.
    """
    aprime = as_matrix(aprime, "aprime")
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if aprime.shape[0] < aprime.shape[1]:
        raise ShapeError("leverage scores need a tall matrix")
    factors = svd(aprime)
    sigma = factors.singular_values
    if lam == 0:
        check_full_column_rank(sigma, "aprime")
    shrink = sigma**2 / (sigma**2 + lam) if lam > 0 else np.ones_like(sigma)
    values = (factors.left**2) @ shrink
    return SensitivityScores(
        values=values, scheme=SCHEME_RIDGE_LEVERAGE, lam=lam, p=2.0
    )


def _sphere_grid(dim: int, resolution: int) -> np.ndarray:
    """Deterministic unit directions in R^dim, columns of the result."""
    if dim == 1:
        return np.array([[1.0, -1.0]])
    if dim == 2:
        theta = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
        return np.vstack([np.cos(theta), np.sin(theta)])
    theta = np.linspace(0.0, np.pi, resolution)
    phi = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    dirs = np.vstack(
        [
            (np.sin(T) * np.cos(P)).ravel(),
            (np.sin(T) * np.sin(P)).ravel(),
            np.cos(T).ravel(),
        ]
    )
    return dirs


def brute_force_sensitivity(
    instance: RegressionInstance,
    spec: ObjectiveSpec,
    grid_resolution: int = 64,
    radius_levels: int = 9,
) -> SensitivityScores:
    """Grid under-approximation of the true sensitivities, d + 1 <= 3 only.

    Candidate queries are unit directions in the augmented space (the ratio is
    scale invariant there) plus [rho*u, -1] for unit u in the design space and
    rho on a log grid between 1e-3 and 1e3, where the pinned last coordinate
    breaks scale invariance.  Being a max over finitely many queries, the
    result never exceeds the true sensitivity.
    """
    if grid_resolution < 16:
        raise ValueError(f"grid_resolution must be >= 16, got {grid_resolution}")
    if radius_levels < 1:
        raise ValueError(f"radius_levels must be >= 1, got {radius_levels}")
    m = instance.d + 1
    if m > 3:
        raise DimensionTooLargeError(
            f"brute force search supports d + 1 <= 3, got {m}"
        )
    p, lam = spec.p, spec.lam
    aprime = augment(instance)
    n = instance.n

    candidates = [_sphere_grid(m, grid_resolution)]
    dirs = _sphere_grid(instance.d, grid_resolution)
    radii = np.logspace(-3.0, 3.0, radius_levels)
    scaled = dirs[:, None, :] * radii[None, :, None]  # (d, levels, dirs)
    scaled = scaled.reshape(instance.d, -1)
    pinned = np.vstack([scaled, -np.ones(scaled.shape[1])])
    candidates.append(pinned)
    X = np.hstack(candidates)

    proj = np.abs(aprime @ X) ** p  # (n, queries)
    reg = lam * np.sum(np.abs(X) ** p, axis=0)  # (queries,)
    denom = proj.sum(axis=0) + reg
    ok = denom > 1e-300
    ratios = (proj[:, ok] + reg[ok] / n) / denom[ok]
    values = ratios.max(axis=1)
    return SensitivityScores(
        values=values, scheme=SCHEME_BRUTE_FORCE, lam=lam, p=p
    )
