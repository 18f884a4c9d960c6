"""Data-driven choice of the hard threshold on off-diagonal correlations.

The threshold is calibrated by multiple testing: the observed absolute
correlations |c_jk| (j < k) are compared against an empirical null built
from the pairwise correlations of p independent Gaussian n-vectors, and a
Benjamini-Hochberg pass at FDR level nu* picks the cutoff. The default
level is nu* = p^(-1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DesignMatrix

#: Pair-count cap for the empirical null; above it pairs are subsampled
#: uniformly without replacement (seeded) to bound memory.
DEFAULT_MAX_PAIRS = 2_000_000


@dataclass(frozen=True)
class NullReferenceConfig:
    """Shape and seed of the empirical null sample."""

    seed: int
    n: int
    p: int

    def __post_init__(self):
        if self.n < 2 or self.p < 2:
            raise ValueError(f"need n >= 2 and p >= 2, got n={self.n}, p={self.p}")


@dataclass(frozen=True, eq=False)
class ThresholdEstimate:
    """Calibrated correlation threshold.

    ``pi_hat`` is the absolute correlation paired with the largest
    Benjamini-Hochberg-qualifying p-value; 1.0 when nothing is rejected
    (every conditioning set then comes out empty and screening degenerates
    to forward regression). ``d`` is the number of tested pairs, p(p-1)/2;
    the null sample has the same length unless the pair cap forced
    subsampling.
    """

    pi_hat: float
    nu_star: float
    reference_abs_correlations: np.ndarray
    rejected_count: int
    d: int


def _pair_from_flat(t: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    # Inverse of the row-major upper-triangle enumeration (l < m).
    l = (p - 2 - np.floor(np.sqrt(-8.0 * t + 4.0 * p * (p - 1) - 7.0) / 2.0 - 0.5)).astype(np.int64)
    m = (t + l + 1 - l * (2 * p - l - 1) // 2).astype(np.int64)
    return l, m


def generate_null_reference(
    cfg: NullReferenceConfig, max_pairs: int = DEFAULT_MAX_PAIRS
) -> np.ndarray:
    """Absolute pairwise Pearson correlations of p seeded Gaussian n-vectors.

    Returns the d = p(p-1)/2 values sorted ascending (or a seeded uniform
    subsample of ``max_pairs`` of them when d exceeds the cap).
    """
    rng = np.random.default_rng(cfg.seed)
    g = rng.standard_normal((cfg.n, cfg.p))
    g = g - g.mean(axis=0, keepdims=True)
    g /= np.linalg.norm(g, axis=0, keepdims=True)
    d = cfg.p * (cfg.p - 1) // 2
    if d <= max_pairs:
        corr = g.T @ g
        ref = np.abs(corr[np.triu_indices(cfg.p, k=1)])
    else:
        flat = np.array([], dtype=np.int64)
        while flat.size < max_pairs:
            extra = rng.integers(0, d, size=max_pairs - flat.size, dtype=np.int64)
            flat = np.unique(np.concatenate([flat, extra]))
        l, m = _pair_from_flat(flat, cfg.p)
        ref = np.abs(np.einsum("ij,ij->j", g[:, l], g[:, m]))
    ref.sort()
    return ref


def empirical_p_values(abs_correlations: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """P_jk = (number of null values >= |c_jk|) / d, via binary search.

    ``reference`` must be sorted ascending.
    """
    abs_correlations = np.asarray(abs_correlations, dtype=np.float64)
    d = reference.shape[0]
    pos = np.searchsorted(reference, abs_correlations, side="left")
    return (d - pos) / d


def benjamini_hochberg_threshold(
    p_values: np.ndarray,
    abs_correlations: np.ndarray,
    nu_star: float,
    reference: np.ndarray | None = None,
) -> ThresholdEstimate:
    """Benjamini-Hochberg cutoff over correlation p-values.

    Sorts p-values ascending and finds the largest index i (1-based) with
    P_(i) <= (i/d) * nu_star; the estimate is the absolute correlation
    paired with P_(i). Ties between equal p-values resolve toward the most
    rejections. No qualifying index yields pi_hat = 1.

    ``reference`` is the null sample the p-values came from and is only
    stored on the result; callers supplying externally computed p-values
    may omit it (an empty array is recorded).
    """
    if not 0.0 < nu_star <= 1.0:
        raise ValueError(f"nu_star must be in (0, 1], got {nu_star}")
    p_values = np.asarray(p_values, dtype=np.float64)
    abs_correlations = np.asarray(abs_correlations, dtype=np.float64)
    if p_values.shape != abs_correlations.shape:
        raise ValueError("p_values and abs_correlations must align")
    d = p_values.shape[0]
    if reference is None:
        reference = np.empty(0)
    # Within tied p-values, put larger |c| first so the last qualifying
    # index carries the smallest rejected correlation.
    order = np.lexsort((-abs_correlations, p_values))
    p_sorted = p_values[order]
    cutoffs = nu_star * np.arange(1, d + 1) / d
    qualifying = np.flatnonzero(p_sorted <= cutoffs)
    if qualifying.size == 0:
        return ThresholdEstimate(
            pi_hat=1.0,
            nu_star=float(nu_star),
            reference_abs_correlations=reference,
            rejected_count=0,
            d=d,
        )
    i = int(qualifying[-1])
    return ThresholdEstimate(
        pi_hat=float(abs_correlations[order[i]]),
        nu_star=float(nu_star),
        reference_abs_correlations=reference,
        rejected_count=i + 1,
        d=d,
    )


def upper_triangle_abs_correlations(X: DesignMatrix) -> np.ndarray:
    """|c_jk| for j < k from the normalized design (row-major pair order)."""
    corr = X.correlation_matrix()
    p = X.n_vars
    return np.minimum(np.abs(corr[np.triu_indices(p, k=1)]), 1.0)


def estimate_threshold(
    X: DesignMatrix,
    seed: int,
    nu_star: float | None = None,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> ThresholdEstimate:
    """Full calibration pipeline for a design matrix.

    Generates the seeded empirical null matching the design's shape,
    converts observed absolute correlations to empirical p-values, and
    applies the Benjamini-Hochberg rule. ``nu_star`` defaults to p^(-1/2).
    The returned estimate keeps the null sample (not the observed
    correlations) as its reference.
    """
    p = X.n_vars
    if p < 2:
        raise ValueError("threshold calibration needs at least two columns")
    if nu_star is None:
        nu_star = p ** -0.5
    observed = upper_triangle_abs_correlations(X)
    reference = generate_null_reference(
        NullReferenceConfig(seed=seed, n=X.n_obs, p=p), max_pairs=max_pairs
    )
    p_values = empirical_p_values(observed, reference)
    return benjamini_hochberg_threshold(p_values, observed, nu_star, reference=reference)
