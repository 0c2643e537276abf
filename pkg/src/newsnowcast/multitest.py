"""Two-stage adaptive step-up control of the false discovery rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MultiTestReport:
    p_raw: tuple[float, ...]
    p_adjusted: tuple[float, ...]
    rejected: tuple[bool, ...]
    q: float
    m0_hat: int
    note: str = ""


def bh_reject(p: np.ndarray, level: float) -> np.ndarray:
    """Classic step-up: reject the k smallest p-values where k is the
    largest i with p_(i) <= level * i / m. Returns a boolean mask."""
    m = len(p)
    order = np.argsort(p, kind="stable")
    sorted_p = p[order]
    thresholds = level * np.arange(1, m + 1) / m
    below = np.nonzero(sorted_p <= thresholds)[0]
    mask = np.zeros(m, dtype=bool)
    if len(below):
        k = below[-1] + 1
        mask[order[:k]] = True
    return mask


def adjust_pvalues(p_values, q: float = 0.05) -> MultiTestReport:
    """Two-stage adaptive procedure.

    Stage one runs the step-up rule at q' = q/(1+q) to estimate the number
    of true nulls m0 = m - r1; stage two reruns it at q' * m / m0. Adjusted
    values are the step-up-monotone quantities p_(j) * (1+q) * m0 / j, so
    rejection is equivalent to adjusted <= q for this q. If stage one
    rejects everything the report notes saturation and rejects all.
    """
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("need a non-empty 1-d p-value vector")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values outside [0, 1]")
    if not 0 < q < 1:
        raise ValueError("q must be in (0, 1)")
    m = len(p)
    q1 = q / (1.0 + q)
    r1 = int(bh_reject(p, q1).sum())
    m0 = m - r1

    if m0 == 0:
        return MultiTestReport(
            p_raw=tuple(float(v) for v in p),
            p_adjusted=tuple(0.0 for _ in p),
            rejected=tuple(True for _ in p),
            q=q,
            m0_hat=0,
            note="stage one rejected every hypothesis; estimator saturated, all rejected",
        )

    rejected = bh_reject(p, q1 * m / m0)

    order = np.argsort(p, kind="stable")
    sorted_p = p[order]
    raw_adj = sorted_p * (1.0 + q) * m0 / np.arange(1, m + 1)
    adj_sorted = np.minimum(1.0, np.minimum.accumulate(raw_adj[::-1])[::-1])
    adjusted = np.empty(m)
    adjusted[order] = adj_sorted

    return MultiTestReport(
        p_raw=tuple(float(v) for v in p),
        p_adjusted=tuple(float(v) for v in adjusted),
        rejected=tuple(bool(v) for v in rejected),
        q=q,
        m0_hat=m0,
    )
