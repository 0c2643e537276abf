"""Post-double-selection inference on a single focal regressor."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lasso import lasso_fit, plugin_penalty, standardize_columns


@dataclass(frozen=True)
class OlsFit:
    coef: np.ndarray  # aligned with the columns passed in (intercept last)
    std_err: np.ndarray
    residuals: np.ndarray


@dataclass(frozen=True)
class DoubleLassoResult:
    eta_hat: float
    std_err: float
    p_value: float
    selected: tuple[int, ...]  # control-column indices in the A|B union
    horizon: int

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value outside [0, 1]")
        if not self.std_err > 0:
            raise ValueError("std_err must be positive")


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def ols_hc1(X: np.ndarray, y: np.ndarray) -> OlsFit:
    """OLS with an intercept appended as the last column and HC1 robust
    standard errors."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    Z = np.column_stack([X, np.ones(n)]) if X.size else np.ones((n, 1))
    k = Z.shape[1]
    if n <= k:
        raise ValueError(f"too few rows for OLS: n={n}, k={k}")
    ZtZ = Z.T @ Z
    try:
        ZtZ_inv = np.linalg.inv(ZtZ)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular design in post-selection OLS") from exc
    coef = ZtZ_inv @ (Z.T @ y)
    resid = y - Z @ coef
    meat = Z.T @ (Z * (resid**2)[:, None])
    cov = ZtZ_inv @ meat @ ZtZ_inv * (n / (n - k))
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return OlsFit(coef=coef, std_err=se, residuals=resid)


def double_lasso(
    X: np.ndarray,
    s: np.ndarray,
    y: np.ndarray,
    horizon: int = 0,
    lam_y: float | None = None,
    lam_s: float | None = None,
) -> DoubleLassoResult:
    """Selection on both reduced forms, then OLS of y on the focal column
    plus the union of selected controls.

    Step 1 runs the penalized regression of y on the controls, step 2 of s
    on the controls; the final fit is y ~ [s, X_union, 1] with HC1 errors
    and a two-sided normal p-value for the focal coefficient.
    """
    X = np.asarray(X, dtype=float)
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape

    Z, _, sd = standardize_columns(X)
    live = [j for j in range(p) if sd[j] > 0]
    Zl = Z[:, live]
    yc = y - y.mean()
    sc = s - s.mean()
    s_sd = s.std()
    if s_sd == 0:
        raise ValueError("focal column is constant")

    sel_a: set[int] = set()
    sel_b: set[int] = set()
    if Zl.shape[1]:
        la = lam_y if lam_y is not None else plugin_penalty(Zl, yc)
        lb = lam_s if lam_s is not None else plugin_penalty(Zl, sc / s_sd)
        sel_a = {live[j] for j in lasso_fit(Zl, yc, la).active}
        sel_b = {live[j] for j in lasso_fit(Zl, sc / s_sd, lb).active}
    union = sorted(sel_a | sel_b)
    if len(union) >= n - 2:
        raise ValueError(
            f"post-selection model saturated: {len(union)} controls for n={n}"
        )

    design = np.column_stack([s] + [X[:, j] for j in union]) if union else s[:, None]
    fit = ols_hc1(design, y)
    eta = float(fit.coef[0])
    se = float(fit.std_err[0])
    if se <= 0:
        raise ValueError("degenerate focal standard error")
    z = eta / se
    p_value = 2.0 * (1.0 - normal_cdf(abs(z)))
    return DoubleLassoResult(
        eta_hat=eta,
        std_err=se,
        p_value=min(1.0, max(0.0, p_value)),
        selected=tuple(union),
        horizon=horizon,
    )
