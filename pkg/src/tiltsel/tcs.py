"""Iterative tilted-correlation screening and extended-BIC model selection.

Each iteration finds the candidate with the largest marginal correlation
against the current residual. If that candidate's conditioning set (on the
residualized, renormalized working design) is empty, it is selected
outright; otherwise the tilted correlations of the candidate and its
conditioning peers are screened and the largest wins. The selected column
joins the active set, the response and all remaining columns are projected
onto the orthogonal complement of the active span, and the remaining
columns are rescaled back to unit norm. The walk stops after m_max
selections (or earlier if every remaining column is numerically inside the
active span) and the final model is the solution-path prefix minimizing
the extended BIC.

With a threshold of 1 every conditioning set is empty and the procedure
reduces exactly to forward regression.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .linalg import DesignMatrix, build_projection, project, response_values
from .thresholding import estimate_threshold
from .tilting import conditioning_set, tilted_correlations_all

# Working-design columns whose residual norm falls below this are inside
# the active span and leave candidacy for the rest of the run.
WORKING_DEGENERATE_TOL = 1e-10
# Floor applied to a residual sum of squares of exactly zero before taking
# the BIC log.
RSS_FLOOR = 1e-300


class NoCandidates(RuntimeError):
    """Every remaining column is numerically inside the active span."""


class Rescaling(str, enum.Enum):
    R1 = "r1"
    R2 = "r2"


class SelectionMode(str, enum.Enum):
    MARGINAL = "marginal"
    TILTED = "tilted"


@dataclass(frozen=True)
class TcsConfig:
    """Knobs for one screening run.

    ``pi`` is either a fixed threshold in [0, 1] or "auto", in which case
    it is calibrated once on the original design (never re-calibrated per
    step). ``m_max`` defaults to floor(n/2). ``seed`` feeds the auto
    threshold's null sample.
    """

    pi: Union[float, str] = "auto"
    rescaling: Rescaling = Rescaling.R2
    m_max: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class PathStep:
    index: int
    mode: SelectionMode
    residual_sq_norm: float
    bic: float


@dataclass(frozen=True, eq=False)
class SolutionPath:
    """Ordered selections with their BIC trace and the BIC-minimal model.

    ``final_coefficients`` are least-squares coefficients of the response
    on the final model, de-normalized to the scale of the raw inputs.
    """

    steps: tuple[PathStep, ...]
    final_model: tuple[int, ...]
    final_coefficients: np.ndarray
    pi_used: float

    @property
    def selected_order(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.steps)


@dataclass(frozen=True, eq=False)
class WorkingState:
    """Residualized model state after |active| selections.

    ``working_design`` holds (I - Pi_A) X with the non-active,
    non-degenerate columns renormalized to unit norm; active and degenerate
    columns are zeroed. ``residual`` is (I - Pi_A) y.
    """

    active: tuple[int, ...]
    residual: np.ndarray
    working_design: np.ndarray
    degenerate: frozenset[int] = field(default_factory=frozenset)


def extended_bic(residual_sq_norm: float, model_size: int, n: int, p: int) -> float:
    """log(rss/n) + (|A|/n)(log n + 2 log p).

    The rss is floored at a tiny positive value so an exactly interpolating
    model yields a (large negative) finite score.
    """
    rss = max(float(residual_sq_norm), RSS_FLOOR)
    return math.log(rss / n) + model_size / n * (math.log(n) + 2.0 * math.log(p))


def initial_state(X: DesignMatrix, y: np.ndarray) -> WorkingState:
    y = response_values(y, X.n_obs)
    return WorkingState(active=(), residual=y, working_design=X.values)


def advance_state(X: DesignMatrix, y: np.ndarray, state: WorkingState, k: int) -> WorkingState:
    """Add column k to the active set and rebuild residual and working design.

    Projections are always rebuilt from the original design, not updated
    incrementally. Columns whose residual norm drops below the degeneracy
    tolerance stay excluded for the remainder of the run.
    """
    y = response_values(y, X.n_obs)
    active = state.active + (int(k),)
    basis = build_projection(X, active)
    residual = y - project(basis, y)
    working = X.values - basis.orthonormal_basis @ (basis.orthonormal_basis.T @ X.values)
    norms = np.linalg.norm(working, axis=0)
    newly_degenerate = set(np.flatnonzero(norms < WORKING_DEGENERATE_TOL).tolist())
    degenerate = frozenset(state.degenerate | newly_degenerate) - set(active)
    dead = sorted(set(active) | degenerate)
    safe = norms.copy()
    safe[dead] = 1.0
    working /= safe
    working[:, dead] = 0.0
    return WorkingState(
        active=active,
        residual=residual,
        working_design=working,
        degenerate=degenerate,
    )


def marginal_scores(state: WorkingState) -> np.ndarray:
    """|Z_j' z| for every column; active and degenerate entries are -1."""
    scores = np.abs(state.working_design.T @ state.residual)
    dead = list(state.active) + sorted(state.degenerate)
    if dead:
        scores[dead] = -1.0
    return scores


def argmax_lowest_index(scores: np.ndarray) -> int:
    # np.argmax returns the first maximum, which is the lowest index.
    return int(np.argmax(scores))


def tcs_step(state: WorkingState, pi: float, rescaling: Rescaling) -> tuple[int, SelectionMode]:
    """One screening decision on the current working state.

    Raises NoCandidates when every remaining column is degenerate.
    """
    p = state.working_design.shape[1]
    if len(state.active) + len(state.degenerate) >= p:
        raise NoCandidates("no non-degenerate candidates remain")
    scores = marginal_scores(state)
    k = argmax_lowest_index(scores)
    exclude = set(state.active) | state.degenerate
    cset = conditioning_set(state.working_design, k, pi, exclude)
    if not cset.members:
        return k, SelectionMode.MARGINAL
    candidates = sorted(set(cset.members) | {k})
    stats = tilted_correlations_all(
        state.working_design, state.residual, pi, candidates, exclude
    )
    if rescaling is Rescaling.R1:
        values = [abs(s.c_star_r1) for s in stats]
    else:
        values = [abs(s.c_star_r2) for s in stats]
    best = int(np.argmax(values))
    return candidates[best], SelectionMode.TILTED


def resolve_m_max(m_max: int | None, n: int) -> int:
    if m_max is None:
        m_max = n // 2
    if not 1 <= m_max < n:
        raise ValueError(f"m_max must satisfy 1 <= m_max < n, got {m_max} with n={n}")
    return m_max


def fit_final_coefficients(
    X: DesignMatrix, y: np.ndarray, model: tuple[int, ...]
) -> np.ndarray:
    """De-normalized least-squares coefficients of y on the given columns."""
    if not model:
        return np.zeros(0)
    y = response_values(y, X.n_obs)
    beta, *_ = np.linalg.lstsq(X.values[:, model], y, rcond=None)
    return beta / X.column_norms_original[list(model)]


def select_bic_minimal_prefix(
    X: DesignMatrix, y: np.ndarray, steps: tuple[PathStep, ...]
) -> tuple[tuple[int, ...], np.ndarray]:
    if not steps:
        return (), np.zeros(0)
    bics = np.array([s.bic for s in steps])
    # First minimum: BIC ties resolve toward the smaller model.
    m_star = int(np.argmin(bics))
    model = tuple(sorted(s.index for s in steps[: m_star + 1]))
    return model, fit_final_coefficients(X, y, model)


def run_greedy_path(
    X: DesignMatrix,
    y: np.ndarray,
    m_max: int | None,
    choose_next,
    pi_used: float,
) -> SolutionPath:
    """Shared driver: iterate a step rule, record the BIC trace, cut by BIC."""
    n, p = X.n_obs, X.n_vars
    y = response_values(y, n)
    m_max = resolve_m_max(m_max, n)
    state = initial_state(X, y)
    steps: list[PathStep] = []
    while len(state.active) < m_max:
        try:
            k, mode = choose_next(state)
        except NoCandidates:
            break
        state = advance_state(X, y, state, k)
        rss = float(state.residual @ state.residual)
        steps.append(
            PathStep(
                index=int(k),
                mode=mode,
                residual_sq_norm=rss,
                bic=extended_bic(rss, len(state.active), n, p),
            )
        )
    final_model, coefficients = select_bic_minimal_prefix(X, y, tuple(steps))
    return SolutionPath(
        steps=tuple(steps),
        final_model=final_model,
        final_coefficients=coefficients,
        pi_used=pi_used,
    )


def run_tcs(X: DesignMatrix, y: np.ndarray, cfg: TcsConfig = TcsConfig()) -> SolutionPath:
    """Full screening run on a normalized design.

    An "auto" threshold is calibrated once on the original design before
    the first step. Early exhaustion of candidates ends the path without
    error; the BIC-minimal prefix is still returned.
    """
    if cfg.pi == "auto":
        pi = estimate_threshold(X, seed=cfg.seed).pi_hat
    else:
        pi = float(cfg.pi)
        if not 0.0 <= pi <= 1.0:
            raise ValueError(f"pi must be in [0, 1] or 'auto', got {cfg.pi}")
    rescaling = Rescaling(cfg.rescaling)

    def choose(state: WorkingState) -> tuple[int, SelectionMode]:
        return tcs_step(state, pi, rescaling)

    return run_greedy_path(X, y, cfg.m_max, choose, pi_used=pi)
