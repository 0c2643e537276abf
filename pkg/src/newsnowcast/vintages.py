"""Real-time data availability: vintages, snapshots, transforms, horizons."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import dates

TRANSFORMS = ("pct_growth", "first_diff", "annualized_qoq_growth")

GDP_RELEASE_LAG_DAYS = 45
MONTHLY_RELEASE_LAG_DAYS = 30
SURVEY_RELEASE_DAY = 20


@dataclass(frozen=True)
class VintageSeries:
    series_id: str
    country: str
    frequency: str
    # (reference_period, value, release_date); several releases per period allowed
    observations: tuple[tuple[str, float, str], ...]
    # surveys publish mid-month, before the reference period closes
    intra_period_release: bool = False

    def __post_init__(self):
        if self.frequency not in (dates.MONTHLY, dates.QUARTERLY):
            raise ValueError(f"bad frequency {self.frequency!r}")
        last_release: dict[str, str] = {}
        for period, _value, release in sorted(self.observations, key=lambda o: (o[0], o[2])):
            floor = (
                dates.period_start(period, self.frequency)
                if self.intra_period_release
                else dates.period_end(period, self.frequency)
            ).isoformat()
            if release < floor:
                kind = "start" if self.intra_period_release else "end"
                raise ValueError(
                    f"{self.series_id}: release {release} precedes {kind} of {period}"
                )
            if period in last_release and release <= last_release[period]:
                raise ValueError(
                    f"{self.series_id}: duplicate release date {release} for {period}"
                )
            last_release[period] = release


@dataclass(frozen=True)
class TargetRelease:
    country: str
    quarter: str
    release_date: str
    value: float

    def __post_init__(self):
        if self.release_date <= dates.quarter_end(self.quarter).isoformat():
            raise ValueError(
                f"release {self.release_date} not after end of {self.quarter}"
            )


@dataclass(frozen=True)
class HorizonGrid:
    min_h: int = 15
    max_h: int = 495
    step: int = 15
    nowcast_threshold: int = 165

    def __post_init__(self):
        if self.min_h <= 0 or self.step <= 0 or self.max_h < self.min_h:
            raise ValueError("bad horizon grid")
        if (self.max_h - self.min_h) % self.step != 0:
            raise ValueError("max_h must be reachable from min_h in whole steps")

    @property
    def horizons(self) -> tuple[int, ...]:
        return tuple(range(self.min_h, self.max_h + 1, self.step))

    def subset(self, h: int) -> str:
        return "nowcast" if h < self.nowcast_threshold else "forecast"


def as_of(series: VintageSeries, date: str) -> dict[str, float]:
    """Snapshot of the series as a forecaster saw it on the given day:
    per period, the latest value released on or before the date."""
    snap: dict[str, tuple[str, float]] = {}
    for period, value, release in series.observations:
        if release <= date:
            prev = snap.get(period)
            if prev is None or release > prev[0]:
                snap[period] = (release, value)
    return {p: v for p, (_r, v) in sorted(snap.items())}


def transform(snapshot: dict[str, float], kind: str, frequency: str) -> dict[str, float]:
    """Apply a growth/difference transform period by period.

    Only periods whose immediate predecessor is present survive; the first
    period always drops.
    """
    if kind not in TRANSFORMS:
        raise ValueError(f"unknown transform {kind!r}")
    if frequency == dates.MONTHLY:
        shift = dates.shift_month
    elif frequency == dates.QUARTERLY:
        shift = dates.shift_quarter
    else:
        raise ValueError(f"bad frequency {frequency!r}")
    out: dict[str, float] = {}
    for period in sorted(snapshot):
        prev = shift(period, -1)
        if prev not in snapshot:
            continue
        x, xl = snapshot[period], snapshot[prev]
        if kind == "first_diff":
            out[period] = x - xl
            continue
        if xl <= 0 or (kind == "annualized_qoq_growth" and x <= 0):
            raise ValueError(f"nonpositive level at {period} under {kind}")
        if kind == "pct_growth":
            out[period] = 100.0 * (x / xl - 1.0)
        else:
            out[period] = 400.0 * math.log(x / xl)
    return out


def horizon_dates(target: TargetRelease, grid: HorizonGrid) -> list[tuple[int, str]]:
    """The forecast dates d-h for every grid horizon."""
    d = dates.parse_date(target.release_date)
    out = []
    for h in grid.horizons:
        out.append((h, (d - dt.timedelta(days=h)).isoformat()))
    return out


def gdp_release_date(quarter: str, lag_days: int = GDP_RELEASE_LAG_DAYS) -> str:
    return (dates.quarter_end(quarter) + dt.timedelta(days=lag_days)).isoformat()


def monthly_release_date(month: str, lag_days: int = MONTHLY_RELEASE_LAG_DAYS) -> str:
    return (dates.month_end(month) + dt.timedelta(days=lag_days)).isoformat()


def survey_release_date(month: str, day: int = SURVEY_RELEASE_DAY) -> str:
    return f"{month}-{day:02d}"


def synth_release_calendar(
    country: str, quarters: Sequence[str], values: dict[str, float] | None = None,
    lag_days: int = GDP_RELEASE_LAG_DAYS,
) -> list[TargetRelease]:
    """Stylized GDP release calendar: quarter end plus a fixed lag."""
    out = []
    for q in quarters:
        out.append(
            TargetRelease(
                country=country,
                quarter=q,
                release_date=gdp_release_date(q, lag_days),
                value=values.get(q, math.nan) if values else math.nan,
            )
        )
    return out


# -- store over many series ---------------------------------------------------


@dataclass
class VintageStore:
    series: dict[tuple[str, str], VintageSeries] = field(default_factory=dict)

    def add(self, s: VintageSeries) -> None:
        key = (s.series_id, s.country)
        if key in self.series:
            raise ValueError(f"duplicate series {key}")
        self.series[key] = s

    def get(self, series_id: str, country: str) -> VintageSeries:
        return self.series[(series_id, country)]

    def ids(self, country: str) -> list[str]:
        return sorted(sid for sid, c in self.series if c == country)

    def validate(self) -> list[str]:
        """Re-check release-timing invariants; returns problem descriptions."""
        problems = []
        for key in sorted(self.series):
            s = self.series[key]
            for period, _value, release in s.observations:
                floor = (
                    dates.period_start(period, s.frequency)
                    if s.intra_period_release
                    else dates.period_end(period, s.frequency)
                ).isoformat()
                if release < floor:
                    problems.append(
                        f"{s.series_id}/{s.country}: {period} released {release}, "
                        "before the period "
                        + ("began" if s.intra_period_release else "ended")
                    )
        return problems


def load_vintages(path: str | Path) -> VintageStore:
    """Read `series_id,country,frequency,period,value,release_date` rows.

    A missing release_date falls back to the stylized calendar: quarterly
    series use quarter end + 45 days, monthly series month end + 30 days,
    and series whose id starts with ``survey`` day 20 of the same month.
    """
    rows: dict[tuple[str, str, str], list[tuple[str, float, str]]] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("series_id,"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 columns")
            sid, country, freq, period, value, release = parts
            if not release:
                if freq == dates.QUARTERLY:
                    release = gdp_release_date(period)
                elif sid.startswith("survey"):
                    release = survey_release_date(period)
                else:
                    release = monthly_release_date(period)
            rows.setdefault((sid, country, freq), []).append((period, float(value), release))
    store = VintageStore()
    for (sid, country, freq), obs in sorted(rows.items()):
        store.add(
            VintageSeries(
                series_id=sid,
                country=country,
                frequency=freq,
                observations=tuple(sorted(obs, key=lambda o: (o[0], o[2]))),
                intra_period_release=sid.startswith("survey"),
            )
        )
    return store


def write_vintages(path: str | Path, store: VintageStore, header_note: str | None = None) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        fh.write("series_id,country,frequency,period,value,release_date\n")
        for key in sorted(store.series):
            s = store.series[key]
            for period, value, release in s.observations:
                fh.write(
                    f"{s.series_id},{s.country},{s.frequency},{period},"
                    f"{format(value, '.10g')},{release}\n"
                )


def indicator_to_vintages(
    series_id: str,
    country: str,
    frequency: str,
    observations: Iterable[tuple[str, float]],
    release_for: str = "monthly",
) -> VintageSeries:
    """Wrap a (period, value) indicator as a pseudo-real-time vintage series
    using the stylized release calendar. Sentiment indicators are treated
    as known at period end (news is observed same-day)."""
    obs = []
    for period, value in observations:
        if math.isnan(value):
            continue
        if release_for == "gdp":
            release = gdp_release_date(period)
        elif release_for == "survey":
            release = survey_release_date(period)
        elif release_for == "sentiment":
            release = dates.period_end(period, frequency).isoformat()
        else:
            release = monthly_release_date(period)
        obs.append((period, value, release))
    return VintageSeries(
        series_id=series_id,
        country=country,
        frequency=frequency,
        observations=tuple(sorted(obs, key=lambda o: (o[0], o[2]))),
        intra_period_release=release_for == "survey",
    )
