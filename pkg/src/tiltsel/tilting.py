"""Conditioning sets, tilted variables, and tilted correlations.

A variable's conditioning set collects the other columns whose absolute
sample correlation with it exceeds the hard threshold. Tilting projects
the variable onto the orthogonal complement of that set, so the retained
inner product with the response no longer carries the contribution of the
highly correlated peers. Two rescalings of the inner product are kept:

* rescaling 1 divides by (1 - a_j), which makes the statistic equal to the
  least-squares coefficient of the variable when the response is regressed
  on the variable together with its conditioning set;
* rescaling 2 divides by sqrt((1 - a_j)(1 - a_jy)), which makes it the
  sample partial correlation with the response given the conditioning set,
  scaled by the response norm.

Here a_j (resp. a_jy) is the squared fraction of the variable (resp. the
response) captured by the conditioning span. An empty conditioning set
collapses both statistics to the plain marginal correlation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .linalg import (
    DEGENERATE_NORM_TOL,
    DesignLike,
    build_projection,
    design_values,
    project,
)

# 1 - a_j (or 1 - a_jy) below this marks the tilt as degenerate: the
# variable (or response) is numerically inside the conditioning span.
DEGENERATE_CAPTURE_TOL = 1e-10


def member_cap(n: int, n_excluded: int) -> int:
    """Largest conditioning-set size allowed at sample size n.

    Grows sublinearly (sqrt(n)); a set that large keeps the captured
    fraction of the tilted variable bounded away from 1, so the rescaled
    statistics stay informative. The n - excluded - 2 term additionally
    keeps the projection problem overdetermined for small n.
    """
    return max(min(n - n_excluded - 2, int(np.ceil(np.sqrt(n)))), 0)


@dataclass(frozen=True)
class ConditioningSet:
    """Peers of column j whose |correlation| with it exceeds the threshold.

    ``truncated`` is set when the member list was cut to the largest
    correlations to keep the projection problem overdetermined.
    """

    j: int
    members: tuple[int, ...]
    threshold_used: float
    truncated: bool = False


@dataclass(frozen=True)
class TiltedStats:
    """Tilted-correlation statistics for one candidate column."""

    j: int
    a_j: float
    a_jy: float
    inner: float
    c_star_r1: float
    c_star_r2: float
    degenerate: bool


def conditioning_set(
    X: DesignLike, j: int, pi: float, exclude: Iterable[int] = ()
) -> ConditioningSet:
    """Columns k (not j, not excluded) with |c_jk| > pi.

    Correlations are clipped to [-1, 1] before comparison so that pi = 1
    always yields an empty set. When more members qualify than
    ``member_cap`` allows, only the largest |c_jk| are kept (ties broken
    toward the lower index) and the result is flagged truncated.
    """
    if not 0.0 <= pi <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {pi}")
    values = design_values(X)
    n = values.shape[0]
    excluded = set(int(e) for e in exclude)
    if j in excluded:
        raise ValueError(f"column {j} cannot be excluded from its own conditioning step")
    corr = np.abs(np.clip(values.T @ values[:, j], -1.0, 1.0))
    corr[j] = 0.0
    if excluded:
        corr[list(excluded)] = 0.0
    members = np.flatnonzero(corr > pi)
    cap = member_cap(n, len(excluded))
    truncated = False
    if members.size > cap:
        truncated = True
        if cap == 0:
            members = members[:0]
        else:
            keep = np.lexsort((members, -corr[members]))[:cap]
            members = np.sort(members[keep])
    return ConditioningSet(
        j=int(j),
        members=tuple(int(k) for k in members),
        threshold_used=float(pi),
        truncated=truncated,
    )


def tilt(X: DesignLike, y: np.ndarray, cset: ConditioningSet) -> TiltedStats:
    """Tilted correlations of column j against ``y`` given its conditioning set.

    With an empty set the statistics reduce to the marginal correlation
    bit-for-bit. A tilt is degenerate when the variable or the response is
    numerically captured by the conditioning span; both rescaled statistics
    are then 0 and the flag is raised, removing the variable from
    contention at this step (dividing by a vanishing remainder would only
    amplify noise).
    """
    values = design_values(X)
    y = np.asarray(y, dtype=np.float64)
    xj = values[:, cset.j]
    if not cset.members:
        inner = float(xj @ y)
        return TiltedStats(
            j=cset.j,
            a_j=0.0,
            a_jy=0.0,
            inner=inner,
            c_star_r1=inner,
            c_star_r2=inner,
            degenerate=False,
        )
    basis = build_projection(X, cset.members)
    captured_x = project(basis, xj)
    captured_y = project(basis, y)
    a_j = float(captured_x @ captured_x)
    y_sq = float(y @ y)
    if y_sq < DEGENERATE_NORM_TOL**2:
        return TiltedStats(cset.j, a_j, 0.0, 0.0, 0.0, 0.0, True)
    a_jy = float(captured_y @ captured_y) / y_sq
    inner = float((xj - captured_x) @ y)
    rem_x = 1.0 - a_j
    rem_y = 1.0 - a_jy
    if rem_x < DEGENERATE_CAPTURE_TOL or rem_y < DEGENERATE_CAPTURE_TOL:
        return TiltedStats(cset.j, a_j, a_jy, inner, 0.0, 0.0, True)
    return TiltedStats(
        j=cset.j,
        a_j=a_j,
        a_jy=a_jy,
        inner=inner,
        c_star_r1=inner / rem_x,
        c_star_r2=inner / np.sqrt(rem_x * rem_y),
        degenerate=False,
    )


def tilted_correlations_all(
    X: DesignLike,
    y: np.ndarray,
    pi: float,
    candidates: Sequence[int],
    exclude: Iterable[int] = (),
) -> list[TiltedStats]:
    """Conditioning set plus tilt for each candidate, in candidate order."""
    exclude = tuple(exclude)
    overlap = set(candidates) & set(exclude)
    if overlap:
        raise ValueError(f"candidates overlap exclusions: {sorted(overlap)}")
    return [tilt(X, y, conditioning_set(X, j, pi, exclude)) for j in candidates]
