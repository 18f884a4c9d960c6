"""Column normalization, orthogonal projections, and correlation kernels.

Conventions used throughout the package: design matrices are dense float64
arrays with observations in rows and one predictor per column. After
normalization every column has unit Euclidean norm, so the plain inner
product between two columns is their sample correlation (columns are not
mean-centered unless explicitly requested). All operations here are pure
functions over immutable inputs and safe to call from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import scipy.linalg

# Relative pivot tolerance for numerical rank decisions.
RANK_TOL = 1e-10
# Residual vectors with norm below this are treated as lying in the
# conditioning span (no identifiable signal left).
DEGENERATE_NORM_TOL = 1e-10
# Columns with original norm below this cannot be normalized.
MIN_COLUMN_NORM = 1e-12


class NonFinite(ValueError):
    """Input contains NaN or Inf entries."""


class DegenerateColumn(ValueError):
    """A column has (near) zero norm and cannot be normalized."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"column {index} has norm below {MIN_COLUMN_NORM}")


class TooManyColumns(ValueError):
    """More columns requested for a projection than there are observations."""


class IndexOverlap(ValueError):
    """A target index also appears in the conditioning set."""


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Column-normalized design matrix.

    ``values`` has unit-norm columns; ``column_norms_original`` holds the
    pre-normalization norms so that fitted coefficients can be mapped back
    to the scale of the raw inputs.
    """

    values: np.ndarray
    column_norms_original: np.ndarray

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]

    def correlation_matrix(self) -> np.ndarray:
        """Gram matrix of the normalized columns, cached after first use."""
        cached = getattr(self, "_corr_cache", None)
        if cached is None:
            cached = self.values.T @ self.values
            object.__setattr__(self, "_corr_cache", cached)
        return cached


@dataclass(frozen=True, eq=False)
class Response:
    """Response vector paired with a design matrix."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("response must be a 1-d vector")
        if not np.all(np.isfinite(v)):
            raise NonFinite("response contains non-finite entries")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class ProjectionBasis:
    """Orthonormal basis for the span of a set of design columns.

    ``orthonormal_basis`` is n x r where r is the numerical rank of the
    indexed columns (pivot tolerance ``RANK_TOL`` relative to the largest
    pivot).
    """

    column_indices: tuple[int, ...]
    orthonormal_basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.orthonormal_basis.shape[1]


DesignLike = Union[DesignMatrix, np.ndarray]


def design_values(X: DesignLike) -> np.ndarray:
    """Matrix of a DesignMatrix, or a plain array used as working design."""
    if isinstance(X, DesignMatrix):
        return X.values
    return X


def response_values(y: Union[Response, np.ndarray], n: int) -> np.ndarray:
    v = y.values if isinstance(y, Response) else np.asarray(y, dtype=np.float64)
    if v.shape != (n,):
        raise ValueError(f"response has length {v.shape}, expected ({n},)")
    return v


def normalize_columns(raw: np.ndarray, center: bool = False) -> DesignMatrix:
    """Scale every column of ``raw`` to unit Euclidean norm.

    With ``center=True`` columns are mean-centered first (off by default:
    normalization alone preserves the raw inner-product geometry).

    Raises NonFinite for NaN/Inf input and DegenerateColumn for columns
    whose norm falls below ``MIN_COLUMN_NORM``.
    """
    values = np.array(raw, dtype=np.float64, copy=True)
    if values.ndim != 2:
        raise ValueError("design must be a 2-d matrix")
    n, p = values.shape
    if n < 2 or p < 1:
        raise ValueError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
    if not np.all(np.isfinite(values)):
        raise NonFinite("design contains non-finite entries")
    if center:
        values -= values.mean(axis=0, keepdims=True)
    norms = np.linalg.norm(values, axis=0)
    bad = np.flatnonzero(norms < MIN_COLUMN_NORM)
    if bad.size:
        raise DegenerateColumn(int(bad[0]))
    values /= norms
    return DesignMatrix(values=values, column_norms_original=norms)


def build_projection(X: DesignLike, indices: Iterable[int]) -> ProjectionBasis:
    """Orthonormal basis of the span of the indexed columns.

    Uses column-pivoted QR; the numerical rank is the number of pivots
    exceeding ``RANK_TOL`` times the largest pivot. Duplicate indices are
    collapsed. Raises TooManyColumns when more than n columns are indexed.
    """
    values = design_values(X)
    n = values.shape[0]
    idx = tuple(sorted(set(int(i) for i in indices)))
    if len(idx) > n:
        raise TooManyColumns(f"{len(idx)} columns indexed but only {n} observations")
    if not idx:
        return ProjectionBasis(column_indices=(), orthonormal_basis=np.zeros((n, 0)))
    sub = values[:, idx]
    q, r, _ = scipy.linalg.qr(sub, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag > RANK_TOL * diag[0]))
    return ProjectionBasis(column_indices=idx, orthonormal_basis=np.ascontiguousarray(q[:, :rank]))


def project(basis: ProjectionBasis, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the basis span (returns Pi v)."""
    b = basis.orthonormal_basis
    if v.shape[0] != b.shape[0]:
        raise ValueError(f"vector length {v.shape[0]} does not match basis rows {b.shape[0]}")
    if b.shape[1] == 0:
        return np.zeros_like(v)
    return b @ (b.T @ v)


def _residualize_pair(X: DesignLike, u: np.ndarray, v: np.ndarray, cond: Iterable[int]):
    basis = build_projection(X, cond)
    return u - project(basis, u), v - project(basis, v)


def _cosine_or_zero(ru: np.ndarray, rv: np.ndarray) -> float:
    nu = np.linalg.norm(ru)
    nv = np.linalg.norm(rv)
    if nu < DEGENERATE_NORM_TOL or nv < DEGENERATE_NORM_TOL:
        return 0.0
    return float(np.clip(ru @ rv / (nu * nv), -1.0, 1.0))


def sample_partial_correlation(X: DesignLike, j: int, k: int, cond: Iterable[int]) -> float:
    """Sample partial correlation between columns j and k given ``cond``.

    Both columns are residualized against the conditioning span and the
    correlation of the residuals is returned. Yields 0 when either residual
    is numerically degenerate (the variable lies in the conditioning span).
    """
    cond = tuple(cond)
    if j == k:
        raise ValueError("j and k must differ")
    if j in cond or k in cond:
        raise IndexOverlap(f"target index in conditioning set: j={j}, k={k}")
    values = design_values(X)
    rj, rk = _residualize_pair(X, values[:, j], values[:, k], cond)
    return _cosine_or_zero(rj, rk)


def response_partial_correlation(
    X: DesignLike, j: int, y: np.ndarray, cond: Iterable[int]
) -> float:
    """Sample partial correlation between column j and a response vector."""
    cond = tuple(cond)
    if j in cond:
        raise IndexOverlap(f"target index in conditioning set: j={j}")
    values = design_values(X)
    rj, ry = _residualize_pair(X, values[:, j], np.asarray(y, dtype=np.float64), cond)
    return _cosine_or_zero(rj, ry)
