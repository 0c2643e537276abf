"""L1-penalized least squares by cyclic coordinate descent on the Gram matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KKT_TOL = 1e-6
CONVERGENCE_TOL = 1e-8
MAX_SWEEPS = 100_000
PLUGIN_C = 1.1


@dataclass(frozen=True)
class LassoFit:
    coef: np.ndarray
    intercept: float
    lam: float
    active: tuple[int, ...]
    objective: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef + self.intercept


def soft_threshold(z: float, g: float) -> float:
    if z > g:
        return z - g
    if z < -g:
        return z + g
    return 0.0


def lasso_objective(X: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    n = len(y)
    r = y - X @ beta
    return float(r @ r) / (2 * n) + lam * float(np.abs(beta).sum())


def lasso_fit(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float = CONVERGENCE_TOL,
    max_sweeps: int = MAX_SWEEPS,
    warm_start: np.ndarray | None = None,
) -> LassoFit:
    """Minimize (1/2n)||y - X beta||^2 + lam * ||beta||_1.

    No intercept term: callers pass standardized columns and a centered
    response when one is wanted. Sweeps cycle over coordinates until the
    largest coefficient update falls below tol.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise ValueError("negative penalty")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("non-finite values in the design or response")
    n, p = X.shape
    if n < 2:
        raise ValueError("need at least two rows")
    if len(y) != n:
        raise ValueError("X and y row counts differ")

    G = (X.T @ X) / n
    b = (X.T @ y) / n
    d = np.diag(G).copy()
    beta = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=float)
    if beta.shape != (p,):
        raise ValueError("warm_start has wrong shape")

    for _sweep in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            if d[j] <= 0:
                # constant (zero) column: the penalty pins it at zero
                if beta[j] != 0.0:
                    delta = max(delta, abs(beta[j]))
                    beta[j] = 0.0
                continue
            z = b[j] - float(G[j] @ beta) + d[j] * beta[j]
            new = soft_threshold(z, lam) / d[j]
            if new != beta[j]:
                delta = max(delta, abs(new - beta[j]))
                beta[j] = new
        if delta < tol:
            break

    active = tuple(int(j) for j in np.nonzero(beta)[0])
    return LassoFit(
        coef=beta,
        intercept=0.0,
        lam=lam,
        active=active,
        objective=lasso_objective(X, y, beta, lam),
    )


def kkt_violation(X: np.ndarray, y: np.ndarray, fit: LassoFit) -> float:
    """Largest violation of the stationarity conditions; ~0 at an optimum."""
    n = len(y)
    grad = X.T @ (y - X @ fit.coef) / n
    worst = 0.0
    for j in range(X.shape[1]):
        if fit.coef[j] != 0.0:
            worst = max(worst, abs(grad[j] - fit.lam * math.copysign(1.0, fit.coef[j])))
        else:
            worst = max(worst, max(0.0, abs(grad[j]) - fit.lam))
    return worst


def plugin_penalty(X: np.ndarray, y: np.ndarray, c: float = PLUGIN_C, iterations: int = 2) -> float:
    """Plugin penalty c * sigma_hat * sqrt(2 log(p n) / n).

    sigma_hat starts at the response's scale and is refined by fitting at
    the implied penalty and re-estimating from residuals.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    rate = math.sqrt(2.0 * math.log(p * n) / n)
    sigma = math.sqrt(float(y @ y) / n)
    lam = c * sigma * rate
    for _ in range(iterations):
        fit = lasso_fit(X, y, lam)
        r = y - X @ fit.coef
        sigma = math.sqrt(float(r @ r) / n)
        lam = c * sigma * rate
    return lam


def standardize_columns(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center and unit-scale columns (population sd). Returns (Z, mean, sd);
    zero-variance columns come back as all zeros with sd reported as 0."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    Z = (X - mean) / safe
    Z[:, sd == 0] = 0.0
    return Z, mean, sd
