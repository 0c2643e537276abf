"""Stacked mixed-frequency regression designs built from vintage snapshots.

Every cell of a design is traceable: the factory records which series,
reference period and release date produced it, and `audit_design`
recomputes each cell from the store through an independent snapshot code
path to prove nothing from after the information date leaked in.
"""

from __future__ import annotations

import datetime as dt
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from . import dates
from .diagnostics import DiagnosticLog
from .vintages import (
    TargetRelease,
    VintageSeries,
    as_of,
    gdp_release_date,
    transform,
)

MONTHLY_LAGS = 3
Y_LAGS = 2
MIN_ROWS = 24
FINAL_DATE = "9999-12-31"


@dataclass(frozen=True)
class CellProvenance:
    row_quarter: str
    column: str
    series_id: str
    period: str
    release_date: str
    asof_date: str
    value: float


@dataclass(frozen=True)
class UmidasDesign:
    country: str
    horizon: int
    target_quarter: str
    quarters: tuple[str, ...]  # estimation rows
    y: np.ndarray
    X: np.ndarray  # standardized controls, estimation rows
    labels: tuple[str, ...]
    focal: dict[str, np.ndarray]  # per-topic sentiment column, original units
    x_new: np.ndarray | None  # standardized prediction row
    focal_new: dict[str, float]
    provenance: tuple[CellProvenance, ...]
    col_mean: np.ndarray
    col_sd: np.ndarray


class _SeriesView:
    """Release-ordered index over one series for fast as-of lookups."""

    def __init__(self, series: VintageSeries):
        self.series = series
        per: dict[str, list[tuple[str, float]]] = {}
        for period, value, release in series.observations:
            per.setdefault(period, []).append((release, value))
        self.periods = sorted(per)
        self.releases: list[list[str]] = []
        self.values: list[list[float]] = []
        self.first_release: list[str] = []
        for p in self.periods:
            vintages = sorted(per[p])
            self.releases.append([r for r, _v in vintages])
            self.values.append([v for _r, v in vintages])
            self.first_release.append(vintages[0][0])

    def at(self, idx: int, asof: str) -> tuple[float, str] | None:
        """Latest vintage of periods[idx] released on or before asof."""
        k = bisect_right(self.releases[idx], asof)
        if k == 0:
            return None
        return self.values[idx][k - 1], self.releases[idx][k - 1]

    def index(self, period: str) -> int | None:
        i = bisect_right(self.periods, period) - 1
        if i >= 0 and self.periods[i] == period:
            return i
        return None


class DesignFactory:
    """Assembles and caches per-row regressor cells for one country.

    Rows are keyed by (quarter, horizon): the information date of a row is
    that quarter's own release date minus the horizon, so rows can be
    reused across forecast origins.
    """

    def __init__(
        self,
        country: str,
        gdp: VintageSeries,
        macro: list[tuple[VintageSeries, str]],
        surveys: list[VintageSeries],
        sentiments: dict[str, VintageSeries],
        releases: dict[str, TargetRelease] | None = None,
        gdp_transform: str = "annualized_qoq_growth",
        monthly_lags: int = MONTHLY_LAGS,
        y_lags: int = Y_LAGS,
        min_rows: int = MIN_ROWS,
    ):
        self.country = country
        self.gdp = gdp
        self.macro = macro
        self.surveys = surveys
        self.sentiments = sentiments
        self.releases = releases or {}
        self.gdp_transform = gdp_transform
        self.monthly_lags = monthly_lags
        self.y_lags = y_lags
        self.min_rows = min_rows
        self._views: dict[str, _SeriesView] = {}
        self._kinds: dict[str, str | None] = {}
        for series, kind in [(gdp, gdp_transform)] + macro:
            self._views[series.series_id] = _SeriesView(series)
            self._kinds[series.series_id] = kind
        for series in surveys + list(sentiments.values()):
            self._views[series.series_id] = _SeriesView(series)
            self._kinds[series.series_id] = None
        self._row_cache: dict = {}
        self._first_release: dict[str, str] = {}
        for period, _value, release in gdp.observations:
            if period not in self._first_release or release < self._first_release[period]:
                self._first_release[period] = release
        self.log = DiagnosticLog()

    # -- as-of cell lookups ----------------------------------------------

    def _cell_at(self, sid: str, idx: int, asof: str) -> tuple[float, str] | None:
        """Value and effective release of periods[idx], transformed if the
        series carries a transform; growth needs the predecessor too."""
        view = self._views[sid]
        kind = self._kinds[sid]
        cur = view.at(idx, asof)
        if cur is None:
            return None
        if kind is None:
            return cur
        if idx == 0:
            return None
        freq = view.series.frequency
        shift = dates.shift_month if freq == dates.MONTHLY else dates.shift_quarter
        if view.periods[idx - 1] != shift(view.periods[idx], -1):
            return None
        prev = view.at(idx - 1, asof)
        if prev is None:
            return None
        pair = {view.periods[idx - 1]: prev[0], view.periods[idx]: cur[0]}
        value = transform(pair, kind, freq)[view.periods[idx]]
        return value, max(cur[1], prev[1])

    def _latest_cells(
        self, sid: str, asof: str, count: int, label: str, row_quarter: str,
        before: str | None = None,
    ) -> list[tuple[str, float, CellProvenance]] | None:
        """The freshest `count` transformed values known at asof, newest
        first; restricted to periods strictly before `before` if given."""
        view = self._views[sid]
        hi = len(view.periods)
        if before is not None:
            hi = bisect_right(view.periods, before)
            if hi and view.periods[hi - 1] == before:
                hi -= 1
        out = []
        idx = hi - 1
        while idx >= 0 and len(out) < count:
            if view.first_release[idx] <= asof:
                got = self._cell_at(sid, idx, asof)
                if got is None:
                    return None  # gap in the visible history
                value, release = got
                lag = len(out) + 1
                name = f"{label}_l{lag}"
                out.append(
                    (
                        name,
                        value,
                        CellProvenance(
                            row_quarter, name, sid, view.periods[idx], release, asof, value
                        ),
                    )
                )
            idx -= 1
        if len(out) < count:
            return None
        return out

    def release_date_of(self, quarter: str) -> str:
        if quarter in self.releases:
            return self.releases[quarter].release_date
        if quarter in self._first_release:
            return self._first_release[quarter]
        return gdp_release_date(quarter)

    def info_date(self, quarter: str, horizon: int) -> str:
        d = dates.parse_date(self.release_date_of(quarter))
        return (d - dt.timedelta(days=horizon)).isoformat()

    def y_value(self, quarter: str, asof: str) -> tuple[float, str] | None:
        """Transformed target value for one quarter as visible at asof."""
        view = self._views[self.gdp.series_id]
        idx = view.index(quarter)
        if idx is None:
            return None
        return self._cell_at(self.gdp.series_id, idx, asof)

    # -- row assembly ----------------------------------------------------

    def row_cells(self, quarter: str, horizon: int):
        """All regressor cells for one row, or None when incomplete.

        Returns (cells, focal) where cells maps control labels to
        (value, provenance) and focal maps each topic to its freshest
        available sentiment value.
        """
        key = (quarter, horizon)
        if key in self._row_cache:
            return self._row_cache[key]
        asof = self.info_date(quarter, horizon)
        cells: dict[str, tuple[float, CellProvenance]] = {}
        ok = True

        got = self._latest_cells(
            self.gdp.series_id, asof, self.y_lags, "y_lag", quarter, before=quarter
        )
        if got is None:
            ok = False
        else:
            for raw_label, value, prov in got:
                label = raw_label.replace("y_lag_l", "y_lag")
                cells[label] = (value, CellProvenance(
                    prov.row_quarter, label, prov.series_id, prov.period,
                    prov.release_date, prov.asof_date, prov.value,
                ))

        if ok:
            for series, _kind in self.macro:
                got = self._latest_cells(
                    series.series_id, asof, self.monthly_lags, series.series_id, quarter
                )
                if got is None:
                    ok = False
                    break
                for label, value, prov in got:
                    cells[label] = (value, prov)
        if ok:
            for series in self.surveys:
                got = self._latest_cells(
                    series.series_id, asof, self.monthly_lags, series.series_id, quarter
                )
                if got is None:
                    ok = False
                    break
                for label, value, prov in got:
                    cells[label] = (value, prov)

        focal: dict[str, tuple[float, CellProvenance]] = {}
        if ok:
            for topic in sorted(self.sentiments):
                sid = self.sentiments[topic].series_id
                got = self._latest_cells(sid, asof, 1, topic, quarter)
                if got is None:
                    ok = False
                    break
                _label, value, prov = got[0]
                focal[topic] = (value, CellProvenance(
                    prov.row_quarter, topic, prov.series_id, prov.period,
                    prov.release_date, prov.asof_date, prov.value,
                ))

        result = (cells, focal) if ok else None
        self._row_cache[key] = result
        return result

    # -- design assembly -------------------------------------------------

    def build(
        self,
        target: TargetRelease,
        horizon: int,
        est_start: str,
        y_asof: str | None = None,
        include_target_row: bool = False,
        with_prediction_row: bool = True,
    ) -> UmidasDesign:
        """Assemble the stacked design for one forecast cell.

        Estimation rows run from est_start over quarters whose own release
        precedes the origin's information date (all quarters through the
        target when include_target_row is set, for in-sample use). y values
        come from the vintage visible at y_asof (origin information date
        when omitted; pass FINAL_DATE for latest data).
        """
        origin_asof = self.info_date(target.quarter, horizon)
        y_asof = y_asof or origin_asof

        if include_target_row:
            candidates = dates.quarter_range(est_start, target.quarter)
        else:
            candidates = [
                q
                for q in dates.quarter_range(est_start, target.quarter)
                if q < target.quarter and self.release_date_of(q) <= origin_asof
            ]

        rows: list[tuple[str, float, str, dict, dict]] = []
        for q in candidates:
            got_y = self.y_value(q, y_asof)
            if got_y is None:
                self.log.add("design", f"{self.country} {q} h={horizon}: target value unavailable, row dropped")
                continue
            got = self.row_cells(q, horizon)
            if got is None:
                self.log.add("design", f"{self.country} {q} h={horizon}: incomplete regressors, row dropped")
                continue
            cells, focal = got
            rows.append((q, got_y[0], got_y[1], cells, focal))

        if len(rows) < self.min_rows:
            raise ValueError(
                f"{self.country} h={horizon} target {target.quarter}: "
                f"only {len(rows)} complete rows, need {self.min_rows}"
            )

        labels = sorted(rows[0][3].keys())
        topics = sorted(self.sentiments)
        provenance: list[CellProvenance] = []
        y = np.array([r[1] for r in rows])
        X = np.array([[r[3][c][0] for c in labels] for r in rows])
        focal = {k: np.array([r[4][k][0] for r in rows]) for k in topics}
        for q, yval, yrel, cells, foc in rows:
            provenance.append(
                CellProvenance(q, "y", self.gdp.series_id, q, yrel, y_asof, yval)
            )
            for c in labels:
                provenance.append(cells[c][1])
            for k in topics:
                provenance.append(foc[k][1])

        x_new = None
        focal_new: dict[str, float] = {}
        if with_prediction_row:
            got = self.row_cells(target.quarter, horizon)
            if got is None:
                raise ValueError(
                    f"{self.country} h={horizon}: prediction row incomplete for {target.quarter}"
                )
            cells, foc = got
            x_new = np.array([cells[c][0] for c in labels])
            for c in labels:
                provenance.append(cells[c][1])
            for k in topics:
                focal_new[k] = foc[k][0]
                provenance.append(foc[k][1])

        # standardize controls on estimation rows; drop degenerate columns
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        keep: list[int] = []
        seen: dict[bytes, str] = {}
        for j, label in enumerate(labels):
            if sd[j] == 0:
                self.log.add("design", f"{self.country} h={horizon}: constant column {label} dropped")
                continue
            col = ((X[:, j] - mean[j]) / sd[j]).round(12)
            sig = col.tobytes()
            if sig in seen:
                self.log.add(
                    "design",
                    f"{self.country} h={horizon}: column {label} duplicates {seen[sig]}, dropped",
                )
                continue
            seen[sig] = label
            keep.append(j)

        Z = (X[:, keep] - mean[keep]) / sd[keep]
        z_new = (x_new[keep] - mean[keep]) / sd[keep] if x_new is not None else None

        return UmidasDesign(
            country=self.country,
            horizon=horizon,
            target_quarter=target.quarter,
            quarters=tuple(r[0] for r in rows),
            y=y,
            X=Z,
            labels=tuple(labels[j] for j in keep),
            focal=focal,
            x_new=z_new,
            focal_new=focal_new,
            provenance=tuple(provenance),
            col_mean=mean[keep],
            col_sd=sd[keep],
        )


def build_design(
    factory: DesignFactory,
    target: TargetRelease,
    horizon: int,
    est_start: str,
    **kwargs,
) -> UmidasDesign:
    return factory.build(target, horizon, est_start, **kwargs)


@dataclass
class AuditReport:
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


class DesignAuditor:
    """Re-derives design cells straight from the stored vintages.

    Uses the plain snapshot functions rather than the factory's indexed
    views, so a bug in the fast path cannot hide from the audit. Cells
    already verified are skipped when the same rows recur across origins.
    """

    def __init__(self, factory: DesignFactory, max_cached_snapshots: int = 64):
        self.factory = factory
        self.series: dict[str, tuple[VintageSeries, str | None]] = {}
        fac = factory
        self.series[fac.gdp.series_id] = (fac.gdp, fac.gdp_transform)
        for series, kind in fac.macro:
            self.series[series.series_id] = (series, kind)
        for series in fac.surveys:
            self.series[series.series_id] = (series, None)
        for series in fac.sentiments.values():
            self.series[series.series_id] = (series, None)
        self._seen: set[CellProvenance] = set()
        self._snaps: dict[tuple[str, str], dict] = {}
        self._max_snaps = max_cached_snapshots

    def _snapshot(self, sid: str, asof: str) -> dict[str, tuple[float, str]]:
        key = (sid, asof)
        if key in self._snaps:
            return self._snaps[key]
        series, kind = self.series[sid]
        values = as_of(series, asof)
        releases: dict[str, str] = {}
        for period, _value, release in series.observations:
            if release <= asof and (period not in releases or release > releases[period]):
                releases[period] = release
        if kind is not None:
            transformed = transform(values, kind, series.frequency)
            shift = dates.shift_month if series.frequency == dates.MONTHLY else dates.shift_quarter
            snap = {
                p: (v, max(releases[p], releases[shift(p, -1)]))
                for p, v in transformed.items()
            }
        else:
            snap = {p: (values[p], releases[p]) for p in values}
        if len(self._snaps) >= self._max_snaps:
            self._snaps.pop(next(iter(self._snaps)))
        self._snaps[key] = snap
        return snap

    def audit(self, design: UmidasDesign) -> AuditReport:
        report = AuditReport()
        for prov in design.provenance:
            report.checked += 1
            if prov in self._seen:
                continue
            if prov.release_date > prov.asof_date:
                report.violations.append(
                    f"{prov.column}@{prov.row_quarter}: release {prov.release_date} "
                    f"after information date {prov.asof_date}"
                )
                continue
            snap = self._snapshot(prov.series_id, prov.asof_date)
            if prov.period not in snap:
                report.violations.append(
                    f"{prov.column}@{prov.row_quarter}: period {prov.period} not in "
                    f"store snapshot at {prov.asof_date}"
                )
                continue
            value, release = snap[prov.period]
            if release != prov.release_date:
                report.violations.append(
                    f"{prov.column}@{prov.row_quarter}: release mismatch "
                    f"{prov.release_date} vs store {release}"
                )
                continue
            if value != prov.value:
                report.violations.append(
                    f"{prov.column}@{prov.row_quarter}: value mismatch "
                    f"{prov.value!r} vs store {value!r}"
                )
                continue
            self._seen.add(prov)
        return report


def audit_design(design: UmidasDesign, factory: DesignFactory) -> AuditReport:
    return DesignAuditor(factory).audit(design)
