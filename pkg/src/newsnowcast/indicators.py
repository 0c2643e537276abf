"""Aggregate sentence scores into indicator series and describe them."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import dates
from .diagnostics import DiagnosticLog
from .scoring import SentenceScore

REGIME_LABELS = ("expansion", "recession")


@dataclass(frozen=True)
class DailySentiment:
    country: str
    topic: str
    date: str
    mean_score: float
    n_sentences: int

    def __post_init__(self):
        if self.n_sentences <= 0:
            raise ValueError("n_sentences must be positive")
        if not -1.0 <= self.mean_score <= 1.0:
            raise ValueError(f"mean_score outside [-1, 1]: {self.mean_score}")


@dataclass(frozen=True)
class IndicatorSeries:
    country: str
    name: str
    frequency: str
    periods: tuple[str, ...]
    values: tuple[float, ...]  # nan marks a period with no data
    standardized: bool = False

    def __post_init__(self):
        if self.frequency not in (dates.DAILY, dates.MONTHLY, dates.QUARTERLY):
            raise ValueError(f"bad frequency {self.frequency!r}")
        if len(self.periods) != len(self.values):
            raise ValueError("periods and values differ in length")
        idx = [dates.period_index(p, self.frequency) for p in self.periods]
        for a, b in zip(idx, idx[1:]):
            if b != a + 1:
                raise ValueError(f"{self.country}/{self.name}: periods not contiguous")

    def observed(self) -> list[tuple[str, float]]:
        return [(p, v) for p, v in zip(self.periods, self.values) if not math.isnan(v)]

    def value_at(self, period: str) -> float:
        try:
            i = self.periods.index(period)
        except ValueError:
            return math.nan
        return self.values[i]


@dataclass(frozen=True)
class RegimeCalendar:
    spans: tuple[tuple[str, str, str], ...]  # (start date, end date, label)

    def __post_init__(self):
        prev_end = None
        for start, end, label in self.spans:
            if label not in REGIME_LABELS:
                raise ValueError(f"unknown regime label {label!r}")
            if end < start:
                raise ValueError(f"regime interval {start}..{end} reversed")
            if prev_end is not None and start <= prev_end:
                raise ValueError(f"regime intervals overlap at {start}")
            prev_end = end

    def label_for(self, date: str) -> str | None:
        for start, end, label in self.spans:
            if start <= date <= end:
                return label
        return None


def aggregate_daily(
    scores: Iterable[SentenceScore], article_dates: Mapping[str, str]
) -> list[DailySentiment]:
    """Collapse sentence scores to one record per (country, topic, day).

    The per-day value is the unweighted mean over sentences; summation runs
    over sorted values so the result is invariant to stream order.
    """
    buckets: dict[tuple[str, str, str], list[float]] = {}
    for s in scores:
        if s.article_id not in article_dates:
            raise ValueError(f"no publish date known for article {s.article_id!r}")
        key = (s.country, s.topic, article_dates[s.article_id])
        buckets.setdefault(key, []).append(s.score)
    out = []
    for (country, topic, day) in sorted(buckets):
        vals = sorted(buckets[(country, topic, day)])
        out.append(
            DailySentiment(
                country=country,
                topic=topic,
                date=day,
                mean_score=math.fsum(vals) / len(vals),
                n_sentences=len(vals),
            )
        )
    return out


def resample(daily: Sequence[DailySentiment], frequency: str) -> IndicatorSeries:
    """Average one (country, topic) daily stream into coarser periods.

    Days without news simply do not contribute; a period with no news days
    at all gets nan.
    """
    if not daily:
        raise ValueError("cannot resample an empty daily series")
    keys = {(d.country, d.topic) for d in daily}
    if len(keys) != 1:
        raise ValueError(f"resample expects a single (country, topic), got {sorted(keys)}")
    country, topic = keys.pop()
    if frequency == dates.DAILY:
        raise ValueError("resample targets monthly or quarterly")

    to_period = dates.month_of if frequency == dates.MONTHLY else dates.quarter_of
    buckets: dict[str, list[float]] = {}
    for d in daily:
        buckets.setdefault(to_period(dates.parse_date(d.date)), []).append(d.mean_score)

    first = min(buckets)
    last = max(buckets)
    i0 = dates.period_index(first, frequency)
    i1 = dates.period_index(last, frequency)
    from_index = dates.month_from_index if frequency == dates.MONTHLY else dates.quarter_from_index
    periods = tuple(from_index(i) for i in range(i0, i1 + 1))
    values = []
    for p in periods:
        vals = sorted(buckets.get(p, ()))
        values.append(math.fsum(vals) / len(vals) if vals else math.nan)
    return IndicatorSeries(
        country=country,
        name=topic,
        frequency=frequency,
        periods=periods,
        values=tuple(values),
    )


def standardize(series: IndicatorSeries) -> IndicatorSeries:
    """Z-score against the full-sample mean and population standard deviation."""
    obs = [v for v in series.values if not math.isnan(v)]
    if len(obs) < 2:
        raise ValueError(f"{series.country}/{series.name}: need >= 2 observations")
    mean = math.fsum(obs) / len(obs)
    var = math.fsum((v - mean) ** 2 for v in obs) / len(obs)
    if var == 0.0:
        raise ValueError(f"{series.country}/{series.name}: zero variance")
    sd = math.sqrt(var)
    values = tuple(v if math.isnan(v) else (v - mean) / sd for v in series.values)
    return replace(series, values=values, standardized=True)


def cross_correlations(
    series: Sequence[IndicatorSeries],
    log: DiagnosticLog | None = None,
    min_overlap: int = 8,
) -> tuple[list[tuple[str, str]], np.ndarray]:
    """Pairwise Pearson correlations over common periods.

    Returns the (country, name) key list and a symmetric matrix with unit
    diagonal; cells with fewer than min_overlap common observations are
    nan and logged.
    """
    log = log if log is not None else DiagnosticLog()
    keys = [(s.country, s.name) for s in series]
    if len(set(keys)) != len(keys):
        raise ValueError("duplicate (country, name) series")
    n = len(series)
    mat = np.full((n, n), np.nan)
    obs = [dict(s.observed()) for s in series]
    for i in range(n):
        mat[i, i] = 1.0
        for j in range(i + 1, n):
            common = sorted(set(obs[i]) & set(obs[j]))
            if len(common) < min_overlap:
                log.add(
                    "cross_correlations",
                    f"{keys[i]} vs {keys[j]}: only {len(common)} common periods",
                )
                continue
            x = np.array([obs[i][p] for p in common])
            y = np.array([obs[j][p] for p in common])
            xc = x - x.mean()
            yc = y - y.mean()
            denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
            if denom == 0.0:
                log.add("cross_correlations", f"{keys[i]} vs {keys[j]}: zero variance")
                continue
            r = float(xc @ yc) / denom
            mat[i, j] = mat[j, i] = max(-1.0, min(1.0, r))
    return keys, mat


def silverman_bandwidth(values: np.ndarray) -> float:
    n = len(values)
    sd = float(values.std(ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * n ** (-0.2)


def regime_density(
    series: IndicatorSeries,
    calendar: RegimeCalendar,
    log: DiagnosticLog | None = None,
    grid_points: int = 512,
    min_obs: int = 5,
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Gaussian KDE of the series per business-cycle regime.

    Each period is attributed to the regime covering its end date. The
    density is evaluated on a grid spanning the regime's data range plus
    three bandwidths each side and normalized so the trapezoid integral
    is exactly one. Regimes with too few observations, or degenerate
    spread, are skipped with a diagnostic.
    """
    log = log if log is not None else DiagnosticLog()
    groups: dict[str, list[float]] = {}
    for period, value in series.observed():
        label = calendar.label_for(dates.period_end(period, series.frequency).isoformat())
        if label is not None:
            groups.setdefault(label, []).append(value)
    out: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for label in REGIME_LABELS:
        vals = groups.get(label)
        if vals is None:
            continue
        if len(vals) < min_obs:
            log.add("regime_density", f"{label}: only {len(vals)} observations, skipped")
            continue
        data = np.array(sorted(vals))
        h = silverman_bandwidth(data)
        if not (h > 0.0 and math.isfinite(h)):
            log.add("regime_density", f"{label}: degenerate bandwidth, skipped")
            continue
        grid = np.linspace(data.min() - 3 * h, data.max() + 3 * h, grid_points)
        z = (grid[:, None] - data[None, :]) / h
        dens = np.exp(-0.5 * z * z).sum(axis=1) / (len(data) * h * math.sqrt(2 * math.pi))
        area = float(np.trapezoid(dens, grid))
        out[label] = (grid, dens / area)
    return out


# -- CSV interfaces -----------------------------------------------------------


def write_indicator_csv(path: str | Path, series: Sequence[IndicatorSeries], header_note: str | None = None) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        fh.write("country,name,frequency,period,value\n")
        for s in series:
            for p, v in s.observed():
                fh.write(f"{s.country},{s.name},{s.frequency},{p},{format(v, '.10g')}\n")


def read_indicator_csv(path: str | Path) -> list[IndicatorSeries]:
    rows: dict[tuple[str, str, str], dict[str, float]] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("country,"):
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 columns")
            country, name, freq, period, value = parts
            rows.setdefault((country, name, freq), {})[period] = float(value)
    out = []
    for (country, name, freq), obs in sorted(rows.items()):
        i0 = min(dates.period_index(p, freq) for p in obs)
        i1 = max(dates.period_index(p, freq) for p in obs)
        if freq == dates.MONTHLY:
            from_index = dates.month_from_index
        elif freq == dates.QUARTERLY:
            from_index = dates.quarter_from_index
        else:
            raise ValueError(f"{path}: daily indicator files are not supported")
        periods = tuple(from_index(i) for i in range(i0, i1 + 1))
        values = tuple(obs.get(p, math.nan) for p in periods)
        out.append(IndicatorSeries(country=country, name=name, frequency=freq, periods=periods, values=values))
    return out


def load_regimes(path: str | Path) -> RegimeCalendar:
    spans = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("start,"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'start,end,label'")
            spans.append((parts[0], parts[1], parts[2].lower()))
    spans.sort()
    return RegimeCalendar(spans=tuple(spans))
