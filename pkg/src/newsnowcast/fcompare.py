"""Forecast comparison tests over loss panels.

Sign convention throughout: a loss differential d_t is benchmark loss
minus candidate loss, so positive values favor the candidate and every
test is one-sided against "candidate no better".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_BOOT = 999
_CRIT_PATHS = 50_000
_CRIT_SEED = 796814023  # fixed: critical values must not move between runs
_CRIT_CACHE: dict[tuple[int, int], float] = {}


def hac_variance(x: np.ndarray, lag: int) -> float:
    """Bartlett-kernel long-run variance of a demeaned series."""
    x = np.asarray(x, dtype=float)
    t = x.size
    if t < 2:
        raise ValueError("need at least 2 observations")
    if lag < 0 or lag >= t:
        raise ValueError(f"bad HAC lag {lag} for length {t}")
    e = x - x.mean()
    omega = float(e @ e) / t
    for j in range(1, lag + 1):
        gamma = float(e[:-j] @ e[j:]) / t
        omega += 2.0 * (1.0 - j / (lag + 1)) * gamma
    return omega


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def msfe_ratio(model_losses: np.ndarray, bench_losses: np.ndarray, min_obs: int = 8) -> float:
    """Mean loss of the candidate over mean loss of the benchmark."""
    m = np.asarray(model_losses, dtype=float)
    b = np.asarray(bench_losses, dtype=float)
    if m.shape != b.shape or m.ndim != 1:
        raise ValueError("loss vectors must be aligned 1-d arrays")
    if m.size < min_obs:
        raise ValueError(f"only {m.size} aligned losses, need {min_obs}")
    if not (np.isfinite(m).all() and np.isfinite(b).all()):
        raise ValueError("non-finite losses")
    denom = float(b.mean())
    if denom == 0.0:
        raise ValueError("benchmark MSFE is zero")
    return float(m.mean()) / denom


@dataclass(frozen=True)
class AspaResult:
    t_stat: float
    p_value: float
    avg_diff: float
    weights: tuple[float, ...]
    block_len: int
    n_boot: int
    subset: str = ""


def aspa_test(
    loss_diff: np.ndarray,
    weighting: str = "inv_sd",
    block_len: int | None = None,
    n_boot: int = DEFAULT_BOOT,
    seed: int = 0,
    subset: str = "",
) -> AspaResult:
    """Average-superior-predictive-ability test over a horizon panel.

    loss_diff is T x J (time by horizon), entries benchmark minus candidate.
    Columns are averaged with inverse-sd weights (or uniform), the mean of
    the averaged series is studentized with a moving-block bootstrap, and
    the p-value is the upper-tail frequency of the recentred bootstrap
    statistics.
    """
    d = np.asarray(loss_diff, dtype=float)
    if d.ndim == 1:
        d = d[:, None]
    if d.ndim != 2:
        raise ValueError("loss_diff must be T x J")
    t, j = d.shape
    if not np.isfinite(d).all():
        raise ValueError("non-finite loss differentials")
    if weighting == "inv_sd":
        sd = d.std(axis=0)
        w = 1.0 / np.maximum(sd, 1e-12)
    elif weighting == "uniform":
        w = np.ones(j)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    w = w / w.sum()
    z = d @ w

    ell = block_len if block_len is not None else max(1, math.ceil(t ** (1.0 / 3.0)))
    if t < 2 * ell:
        raise ValueError(f"sample length {t} too short for block length {ell}")
    k = math.ceil(t / ell)
    zbar = float(z.mean())

    rng = np.random.default_rng(seed)
    starts = rng.integers(0, t - ell + 1, size=(n_boot, k))
    # rolling means over every admissible block, then index by drawn starts
    csum = np.concatenate([[0.0], np.cumsum(z)])
    block_means = (csum[ell:] - csum[:-ell]) / ell
    m = block_means[starts]  # n_boot x k

    idx = (starts[:, :, None] + np.arange(ell)[None, None, :]).reshape(n_boot, k * ell)[:, :t]
    zstar = z[idx]
    zbar_star = zstar.mean(axis=1)

    center = m.mean(axis=1, keepdims=True)
    omega_star = np.sqrt(ell * ((m - center) ** 2).mean(axis=1))
    diff = math.sqrt(t) * (zbar_star - zbar)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_star = np.where(
            omega_star > 0, diff / omega_star, np.where(diff == 0, 0.0, np.sign(diff) * np.inf)
        )

    omega = float(np.std(math.sqrt(t) * zbar_star))
    if omega == 0.0:
        t_stat = 0.0 if zbar == 0 else math.copysign(math.inf, zbar)
    else:
        t_stat = math.sqrt(t) * zbar / omega
    p = (1.0 + float(np.sum(t_star >= t_stat))) / (n_boot + 1.0)
    return AspaResult(
        t_stat=t_stat,
        p_value=p,
        avg_diff=zbar,
        weights=tuple(float(v) for v in w),
        block_len=ell,
        n_boot=n_boot,
        subset=subset,
    )


@dataclass(frozen=True)
class PaResult:
    t_stat: float
    p_value: float
    avg_diff: float
    hac_lag: int


def pa_test(loss_diff: np.ndarray, h_steps: int = 1) -> PaResult:
    """Studentized mean loss differential at a single horizon.

    HAC lag follows the forecast overlap (h_steps - 1); one-sided normal
    p-value against "candidate no better".
    """
    d = np.asarray(loss_diff, dtype=float)
    if d.ndim != 1 or d.size < 20:
        raise ValueError("need a 1-d differential series of length >= 20")
    if not np.isfinite(d).all():
        raise ValueError("non-finite loss differentials")
    if h_steps < 1:
        raise ValueError("h_steps must be positive")
    lag = min(h_steps - 1, d.size - 1)
    omega2 = hac_variance(d, lag)
    if omega2 <= 0.0:
        raise ValueError("zero long-run variance, differential is degenerate")
    t_stat = float(d.mean()) / math.sqrt(omega2 / d.size)
    return PaResult(t_stat=t_stat, p_value=_normal_sf(t_stat), avg_diff=float(d.mean()), hac_lag=lag)


@dataclass(frozen=True)
class FluctuationResult:
    stats: np.ndarray  # one value per window position
    window: int
    critical_value: float  # 10% one-sided
    max_stat: float
    argmax: int  # window start index of the largest local statistic

    @property
    def rejected(self) -> bool:
        return self.max_stat > self.critical_value

    @property
    def centers(self) -> np.ndarray:
        """Sample positions the local statistics are centered on."""
        return np.arange(self.stats.size) + (self.window - 1) / 2.0


def _sup_window_critical(t: int, window: int, alpha: float = 0.10) -> float:
    """Upper quantile of the sup of standardized rolling sums of iid noise.

    Simulated once per (length, window) pair with a fixed seed and cached;
    the discrete simulation replaces the limiting Brownian functional.
    """
    key = (t, window)
    if key in _CRIT_CACHE:
        return _CRIT_CACHE[key]
    rng = np.random.default_rng(_CRIT_SEED)
    sups = np.empty(_CRIT_PATHS)
    chunk = max(1, int(2_000_000 / max(t, 1)))
    done = 0
    while done < _CRIT_PATHS:
        n = min(chunk, _CRIT_PATHS - done)
        e = rng.standard_normal((n, t))
        csum = np.concatenate([np.zeros((n, 1)), np.cumsum(e, axis=1)], axis=1)
        sums = (csum[:, window:] - csum[:, :-window]) / math.sqrt(window)
        sups[done : done + n] = sums.max(axis=1)
        done += n
    crit = float(np.quantile(sups, 1.0 - alpha))
    _CRIT_CACHE[key] = crit
    return crit


def fluctuation_test(
    loss_diff: np.ndarray, mu: float = 0.2, window: int | None = None
) -> FluctuationResult:
    """Rolling local relative accuracy over the evaluation sample.

    The window covers a fraction mu of the sample (explicit `window`
    overrides). Each window's mean differential is standardized by the
    full-sample long-run sd; the path is compared against a simulated
    10% one-sided critical value for its sup.
    """
    d = np.asarray(loss_diff, dtype=float)
    if d.ndim != 1:
        raise ValueError("need a 1-d differential series")
    t = d.size
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"bad window fraction {mu}")
    w = window if window is not None else math.ceil(mu * t)
    if w < 8:
        raise ValueError(f"window {w} too small")
    if w > t:
        raise ValueError(f"window {w} exceeds sample length {t}")
    if not np.isfinite(d).all():
        raise ValueError("non-finite loss differentials")
    lag = max(1, math.ceil(w ** (1.0 / 3.0)))
    omega2 = hac_variance(d, lag)
    if omega2 <= 0.0:
        raise ValueError("zero long-run variance, differential is degenerate")
    sd = math.sqrt(omega2)
    csum = np.concatenate([[0.0], np.cumsum(d)])
    means = (csum[w:] - csum[:-w]) / w
    stats = math.sqrt(w) * means / sd
    crit = _sup_window_critical(t, w)
    amax = int(np.argmax(stats))
    return FluctuationResult(
        stats=stats,
        window=w,
        critical_value=crit,
        max_stat=float(stats[amax]),
        argmax=amax,
    )
