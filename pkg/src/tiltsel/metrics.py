"""Scoring of selection outputs: FP, FN, squared L2 error, ROC traces.

Coefficient error is always computed in the de-normalized (raw-column)
basis, which makes it invariant to the internal unit-norm scaling of the
design. ROC points are per path prefix; curves from different replicates
are averaged pointwise at common prefix lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .simulate import TrueModel
from .tcs import SolutionPath


class DimensionMismatch(ValueError):
    """Truth and selection output disagree on the number of variables."""


@dataclass(frozen=True, eq=False)
class SelectionReport:
    """FP/FN/L2 and the per-prefix ROC trace for one method on one replicate."""

    fp: int
    fn_: int
    l2_sq: float
    roc_points: tuple[tuple[float, float], ...]
    method: str
    replicate: int


def fpr_guideline(truth: TrueModel) -> float:
    """Plotting guideline: the FPR level 2.5 |S| / p."""
    return 2.5 * len(truth.support) / truth.beta.shape[0]


def _rates(selected: set[int], support: set[int], p: int) -> tuple[float, float]:
    tp = len(selected & support)
    fp = len(selected) - tp
    tpr = tp / len(support) if support else 0.0
    fpr = fp / (p - len(support)) if p > len(support) else 0.0
    return fpr, tpr


def score_selection(
    truth: TrueModel,
    selected: Iterable[int],
    coefficients: np.ndarray,
    prefixes: Sequence[Iterable[int]] = (),
    method: str = "",
    replicate: int = 0,
) -> SelectionReport:
    """Score an arbitrary final model (``coefficients`` aligned with ``selected``)."""
    p = truth.beta.shape[0]
    selected = tuple(selected)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if len(selected) != coefficients.shape[0]:
        raise DimensionMismatch("one coefficient per selected index required")
    if any(j < 0 or j >= p for j in selected):
        raise DimensionMismatch(f"selected index outside [0, {p})")
    support = set(truth.support)
    chosen = set(selected)
    fp = len(chosen - support)
    fn = len(support - chosen)
    beta_hat = np.zeros(p)
    beta_hat[list(selected)] = coefficients
    l2_sq = float(np.sum((truth.beta - beta_hat) ** 2))
    roc = tuple(_rates(set(prefix), support, p) for prefix in prefixes)
    return SelectionReport(
        fp=fp, fn_=fn, l2_sq=l2_sq, roc_points=roc, method=method, replicate=replicate
    )


def score(
    truth: TrueModel, path: SolutionPath, method: str = "", replicate: int = 0
) -> SelectionReport:
    """Score a solution path: final model plus one ROC point per prefix."""
    p = truth.beta.shape[0]
    order = path.selected_order
    if any(j >= p for j in order):
        raise DimensionMismatch("path selects indices outside the truth's design")
    prefixes = [order[: i + 1] for i in range(len(order))]
    return score_selection(
        truth,
        path.final_model,
        path.final_coefficients,
        prefixes=prefixes,
        method=method,
        replicate=replicate,
    )


def summary_rows(reports: Sequence[SelectionReport]) -> list[dict]:
    """Per-method means of FP, FN, FP+FN, and L2, in first-seen method order."""
    if not reports:
        raise ValueError("no reports to aggregate")
    by_method: dict[str, list[SelectionReport]] = {}
    for r in reports:
        by_method.setdefault(r.method, []).append(r)
    rows = []
    for method, group in by_method.items():
        fp = float(np.mean([r.fp for r in group]))
        fn = float(np.mean([r.fn_ for r in group]))
        rows.append(
            {
                "method": method,
                "replicates": len(group),
                "mean_fp": fp,
                "mean_fn": fn,
                "mean_fp_plus_fn": fp + fn,
                "mean_l2_sq": float(np.mean([r.l2_sq for r in group])),
            }
        )
    return rows


def averaged_roc(reports: Sequence[SelectionReport]) -> dict[str, list[tuple[float, float]]]:
    """Pointwise ROC means per method at each prefix length.

    A step's average runs over the replicates whose paths reached it.
    """
    by_method: dict[str, list[SelectionReport]] = {}
    for r in reports:
        by_method.setdefault(r.method, []).append(r)
    curves: dict[str, list[tuple[float, float]]] = {}
    for method, group in by_method.items():
        longest = max((len(r.roc_points) for r in group), default=0)
        points = []
        for step in range(longest):
            at_step = [r.roc_points[step] for r in group if len(r.roc_points) > step]
            points.append(
                (
                    float(np.mean([q[0] for q in at_step])),
                    float(np.mean([q[1] for q in at_step])),
                )
            )
        curves[method] = points
    return curves


def aggregate(reports: Sequence[SelectionReport]) -> dict:
    """Summary table plus averaged ROC curves for a batch of reports."""
    return {"summary": summary_rows(reports), "roc": averaged_roc(reports)}
