"""Comparator selection methods: FS, FR, one-shot marginal screening, PC-simple.

Forward regression (FR) greedily picks the largest |Z_j' z| on the
residualized and renormalized working design, which is exactly the
screening run with the threshold pinned at 1. Forward selection (FS) skips
the renormalization and screens |X_j' z| on the original columns. Both
reuse the screening path type and extended BIC so downstream metrics are
method-agnostic. PC-simple iteratively drops variables whose partial
correlation with the response, given some conditioning subset of the
surviving variables, is not significantly nonzero under Fisher's
Z-transform.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .linalg import DesignMatrix, response_partial_correlation, response_values
from .tcs import (
    NoCandidates,
    SelectionMode,
    SolutionPath,
    WorkingState,
    argmax_lowest_index,
    marginal_scores,
    run_greedy_path,
)

# Subset enumeration in PC-simple is combinatorial; orders above this are
# never attempted, and higher-order passes only run once the active set is
# small enough.
PC_SIMPLE_MAX_ORDER = 3
PC_SIMPLE_MAX_ACTIVE = 50


class BaselineMethod(str, enum.Enum):
    FS = "fs"
    FR = "fr"
    MARGINAL = "marginal"
    PC_SIMPLE = "pcsimple"


@dataclass(frozen=True)
class BaselineConfig:
    method: BaselineMethod
    m_max: int | None = None
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


def forward_regression(X: DesignMatrix, y: np.ndarray, m_max: int | None = None) -> SolutionPath:
    """Greedy selection on the renormalized residualized design."""

    def choose(state: WorkingState) -> tuple[int, SelectionMode]:
        if len(state.active) + len(state.degenerate) >= X.n_vars:
            raise NoCandidates("span exhausted")
        return argmax_lowest_index(marginal_scores(state)), SelectionMode.MARGINAL

    return run_greedy_path(X, y, m_max, choose, pi_used=1.0)


def forward_selection(X: DesignMatrix, y: np.ndarray, m_max: int | None = None) -> SolutionPath:
    """Greedy selection of the largest |X_j' z| without column rescaling."""

    def choose(state: WorkingState) -> tuple[int, SelectionMode]:
        if len(state.active) + len(state.degenerate) >= X.n_vars:
            raise NoCandidates("span exhausted")
        scores = np.abs(X.values.T @ state.residual)
        dead = list(state.active) + sorted(state.degenerate)
        if dead:
            scores[dead] = -1.0
        return argmax_lowest_index(scores), SelectionMode.MARGINAL

    return run_greedy_path(X, y, m_max, choose, pi_used=1.0)


def marginal_screening(X: DesignMatrix, y: np.ndarray, k: int) -> tuple[int, ...]:
    """Indices of the k largest |X_j' y| (ties toward the lower index)."""
    if not 1 <= k <= X.n_vars:
        raise ValueError(f"k must be in [1, p], got {k}")
    y = response_values(y, X.n_obs)
    scores = np.abs(X.values.T @ y)
    order = np.lexsort((np.arange(X.n_vars), -scores))
    return tuple(sorted(int(j) for j in order[:k]))


def marginal_screening_path(
    X: DesignMatrix, y: np.ndarray, m_max: int | None = None
) -> SolutionPath:
    """One-shot marginal ranking packaged as a solution path.

    The ranking by |X_j' y| is fixed up front; the path just walks it so
    that the extended BIC can cut a final model comparable with the
    stepwise methods.
    """
    y = response_values(y, X.n_obs)
    scores = np.abs(X.values.T @ y)
    ranking = np.lexsort((np.arange(X.n_vars), -scores))
    position = {int(j): r for r, j in enumerate(ranking)}

    def choose(state: WorkingState) -> tuple[int, SelectionMode]:
        remaining = [
            j for j in ranking if j not in state.active and j not in state.degenerate
        ]
        if not remaining:
            raise NoCandidates("span exhausted")
        return int(min(remaining, key=position.__getitem__)), SelectionMode.MARGINAL

    return run_greedy_path(X, y, m_max, choose, pi_used=1.0)


def _fisher_z_accepts(rho: float, n: int, order: int, critical: float) -> bool:
    # Accepting the null (zero partial correlation) removes the variable.
    dof = n - order - 3
    if dof <= 0:
        return True
    rho = min(max(rho, -1.0 + 1e-15), 1.0 - 1e-15)
    z = np.sqrt(dof) * np.arctanh(rho)
    return abs(z) <= critical


def pc_simple(
    X: DesignMatrix,
    y: np.ndarray,
    alpha: float = 0.05,
    max_order: int = PC_SIMPLE_MAX_ORDER,
    max_active_for_higher_order: int = PC_SIMPLE_MAX_ACTIVE,
) -> tuple[int, ...]:
    """Iterative partial-correlation screening.

    Starting from all variables, order ell = 0, 1, ... removes every
    variable j for which some conditioning subset D of the survivors
    (|D| = ell, j not in D) fails Fisher's Z-test of nonzero partial
    correlation with the response at level ``alpha``. Passes stop once the
    active set is no larger than the order, the order cap is hit, or the
    active set is still too large for combinatorial enumeration.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    y = response_values(y, X.n_obs)
    n = X.n_obs
    critical = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    active = list(range(X.n_vars))
    for order in range(max_order + 1):
        if len(active) <= order:
            break
        if order >= 1 and len(active) > max_active_for_higher_order:
            break
        keep = []
        for j in active:
            others = [k for k in active if k != j]
            removed = False
            for cond in itertools.combinations(others, order):
                rho = response_partial_correlation(X, j, y, cond)
                if _fisher_z_accepts(rho, n, order, critical):
                    removed = True
                    break
            if not removed:
                keep.append(j)
        active = keep
    return tuple(active)
