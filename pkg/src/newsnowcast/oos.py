"""Expanding-window pseudo-real-time forecast evaluation.

For every (forecast origin, horizon) cell the benchmark and each
sentiment-augmented model are re-selected and re-estimated from the
design visible at that cell's information date; realized values are the
flash estimates, never revised data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .design import FINAL_DATE, DesignAuditor, DesignFactory, UmidasDesign
from .diagnostics import DiagnosticLog
from .inference import double_lasso
from .lasso import lasso_fit, plugin_penalty
from .multitest import adjust_pvalues
from .vintages import HorizonGrid, TargetRelease

BENCHMARK = "ARX"
AVERAGE = "AVERAGE"


@dataclass(frozen=True)
class ForecastRecord:
    model: str
    country: str
    target: str  # quarter being predicted
    horizon: int
    forecast_date: str  # information date the prediction was made on
    prediction: float
    realized: float


@dataclass
class OosResult:
    records: list[ForecastRecord] = field(default_factory=list)
    audit_checked: int = 0
    audit_violations: list[str] = field(default_factory=list)
    log: DiagnosticLog = field(default_factory=DiagnosticLog)

    def models(self) -> list[str]:
        return sorted({r.model for r in self.records})


def _ols_predict(F: np.ndarray, y: np.ndarray, f_new: np.ndarray) -> float:
    """Least squares with intercept; rank deficiency is a failure."""
    A = np.column_stack([F, np.ones(len(y))])
    if A.shape[0] <= A.shape[1]:
        raise ValueError(f"{A.shape[1]} regressors for {A.shape[0]} rows")
    coef, _res, rank, _sv = np.linalg.lstsq(A, y, rcond=None)
    if rank < A.shape[1]:
        raise ValueError("rank-deficient post-selection regression")
    return float(np.append(f_new, 1.0) @ coef)


def forecast_cell(design: UmidasDesign, log: DiagnosticLog | None = None) -> dict[str, float]:
    """Benchmark and per-topic model predictions for one (origin, horizon).

    One lasso on the outcome fixes the benchmark's control set; each
    sentiment model adds the controls selected for its own indicator and
    re-estimates by least squares with the indicator in original units.
    A failing topic is skipped with a diagnostic; a failing benchmark
    fails the cell.
    """
    y = design.y
    X = design.X
    x_new = design.x_new
    yc = y - y.mean()
    lam_y = plugin_penalty(X, yc)
    sel_y = sorted(lasso_fit(X, yc, lam_y).active)

    preds: dict[str, float] = {}
    preds[BENCHMARK] = _ols_predict(X[:, sel_y], y, x_new[sel_y])

    for topic in sorted(design.focal):
        s = design.focal[topic]
        sd = float(s.std())
        if sd == 0.0:
            if log is not None:
                log.add("oos", f"{design.target_quarter} h={design.horizon}: "
                        f"sentiment {topic} constant, model skipped")
            continue
        sc = (s - s.mean()) / sd
        lam_s = plugin_penalty(X, sc)
        sel_s = sorted(lasso_fit(X, sc, lam_s).active)
        union = sorted(set(sel_y) | set(sel_s))
        F = np.column_stack([s, X[:, union]])
        f_new = np.append(design.focal_new[topic], x_new[union])
        try:
            preds[f"ARXS:{topic}"] = _ols_predict(F, y, f_new)
        except ValueError as exc:
            if log is not None:
                log.add("oos", f"{design.target_quarter} h={design.horizon}: "
                        f"{topic} estimation failed: {exc}")
    return preds


def average_forecasts(
    records: list[ForecastRecord], log: DiagnosticLog | None = None
) -> list[ForecastRecord]:
    """Pool the sentiment models into one AVERAGE forecast per cell.

    A cell only gets an AVERAGE when every sentiment model that appears
    anywhere in the records contributed to it; incomplete cells are
    skipped with a diagnostic."""
    members = sorted({r.model for r in records if r.model.startswith("ARXS:")})
    if not members:
        return []
    cells: dict[tuple, dict[str, ForecastRecord]] = {}
    for r in records:
        if r.model in members:
            cells.setdefault((r.country, r.target, r.horizon, r.forecast_date), {})[r.model] = r
    out = []
    for key in sorted(cells):
        got = cells[key]
        if len(got) < len(members):
            if log is not None:
                missing = sorted(set(members) - set(got))
                log.add("oos", f"{key[1]} h={key[2]}: average skipped, missing {missing}")
            continue
        any_rec = got[members[0]]
        out.append(
            ForecastRecord(
                model=AVERAGE,
                country=any_rec.country,
                target=any_rec.target,
                horizon=any_rec.horizon,
                forecast_date=any_rec.forecast_date,
                prediction=float(np.mean([got[m].prediction for m in members])),
                realized=any_rec.realized,
            )
        )
    return out


def run_horizon(
    factory: DesignFactory,
    targets: list[TargetRelease],
    horizon: int,
    est_start: str,
    realized: dict[str, float],
    audit: bool = True,
) -> OosResult:
    """All origins at one horizon, with a horizon-local auditor and log.

    Partial results merge in horizon order, so a parallel run reproduces
    the sequential records, diagnostics, and audit counts exactly.
    """
    part = OosResult()
    auditor = DesignAuditor(factory) if audit else None
    for target in targets:
        if target.quarter not in realized:
            continue
        try:
            design = factory.build(target, horizon, est_start)
        except ValueError as exc:
            part.log.add("oos", f"{target.quarter} h={horizon}: design failed: {exc}")
            continue
        if auditor is not None:
            rep = auditor.audit(design)
            part.audit_checked += rep.checked
            part.audit_violations.extend(rep.violations)
        try:
            preds = forecast_cell(design, part.log)
        except (ValueError, np.linalg.LinAlgError) as exc:
            part.log.add("oos", f"{target.quarter} h={horizon}: estimation failed: {exc}")
            continue
        g = factory.info_date(target.quarter, horizon)
        for model in sorted(preds):
            part.records.append(
                ForecastRecord(
                    model=model,
                    country=factory.country,
                    target=target.quarter,
                    horizon=horizon,
                    forecast_date=g,
                    prediction=preds[model],
                    realized=realized[target.quarter],
                )
            )
    return part


# Fork-inherited state for parallel runs; set just before the pool starts.
_POOL_STATE: dict = {}


def _pool_horizon(horizon: int) -> OosResult:
    st = _POOL_STATE
    return run_horizon(
        st["factory"], st["targets"], horizon, st["est_start"], st["realized"], st["audit"]
    )


def run_oos(
    factory: DesignFactory,
    targets: list[TargetRelease],
    grid: HorizonGrid,
    est_start: str,
    audit: bool = True,
    jobs: int = 1,
    realized_vintage: str = "flash",
) -> OosResult:
    """Forecast every target at every grid horizon, expanding the
    estimation window as quarters get released. Cells whose design or
    estimation fails are skipped with a diagnostic; the run continues.

    Forecasts are scored against the first-release outcome by default;
    ``realized_vintage="final"`` scores against the latest vintage instead.
    """
    if realized_vintage not in ("flash", "final"):
        raise ValueError(f"realized_vintage must be flash or final, got {realized_vintage!r}")
    result = OosResult()
    targets = sorted(targets, key=lambda t: t.quarter)

    realized: dict[str, float] = {}
    for target in targets:
        asof = target.release_date if realized_vintage == "flash" else FINAL_DATE
        got = factory.y_value(target.quarter, asof)
        if got is None:
            result.log.add(
                "oos",
                f"{target.quarter}: {realized_vintage} value not derivable, origin skipped",
            )
            continue
        realized[target.quarter] = got[0]

    parts: list[OosResult]
    if jobs > 1:
        import concurrent.futures as cf
        import multiprocessing as mp

        _POOL_STATE.update(
            factory=factory, targets=targets, est_start=est_start,
            realized=realized, audit=audit,
        )
        try:
            ctx = mp.get_context("fork")
            with cf.ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
                parts = list(pool.map(_pool_horizon, grid.horizons))
        except ValueError:
            # no fork on this platform, run in process
            parts = [
                run_horizon(factory, targets, h, est_start, realized, audit)
                for h in grid.horizons
            ]
        finally:
            _POOL_STATE.clear()
    else:
        parts = [
            run_horizon(factory, targets, h, est_start, realized, audit)
            for h in grid.horizons
        ]

    for part in parts:
        result.records.extend(part.records)
        result.audit_checked += part.audit_checked
        result.audit_violations.extend(part.audit_violations)
        result.log.records.extend(part.log.records)
    result.records.extend(average_forecasts(result.records, result.log))
    return result


# -- loss panels --------------------------------------------------------------


def squared_losses(records: list[ForecastRecord]) -> dict[tuple[str, int], dict[str, float]]:
    """(model, horizon) -> target quarter -> squared forecast error."""
    out: dict[tuple[str, int], dict[str, float]] = {}
    for r in records:
        out.setdefault((r.model, r.horizon), {})[r.target] = (r.prediction - r.realized) ** 2
    return out


@dataclass(frozen=True)
class LossPanel:
    """Aligned squared-error loss differentials, benchmark minus model."""

    model: str
    bench: str
    origins: tuple[str, ...]
    horizons: tuple[int, ...]
    diffs: np.ndarray  # T x J


def loss_diff_matrix(
    records: list[ForecastRecord],
    model: str,
    horizons: list[int],
    bench: str = BENCHMARK,
) -> LossPanel:
    """Rectangular T x J panel of (benchmark loss - model loss): only
    origins with both models present at every requested horizon enter."""
    losses = squared_losses(records)
    origins: set[str] | None = None
    for m in (model, bench):
        for h in horizons:
            cell = losses.get((m, h))
            if cell is None:
                raise ValueError(f"no forecasts for {m} at h={h}")
            origins = set(cell) if origins is None else origins & set(cell)
    if not origins:
        raise ValueError(f"no aligned origins for {model} vs {bench}")
    rows = sorted(origins)
    d = np.empty((len(rows), len(horizons)))
    for j, h in enumerate(horizons):
        bl = losses[(bench, h)]
        ml = losses[(model, h)]
        for i, q in enumerate(rows):
            d[i, j] = bl[q] - ml[q]
    return LossPanel(
        model=model, bench=bench, origins=tuple(rows),
        horizons=tuple(horizons), diffs=d,
    )


def msfe_table(
    records: list[ForecastRecord], bench: str = BENCHMARK, min_obs: int = 8
) -> list[tuple[str, int, float, int]]:
    """Per model and horizon: MSFE ratio against the benchmark over the
    origins both models share, with the overlap count."""
    losses = squared_losses(records)
    out = []
    for model, h in sorted(losses):
        if model == bench:
            continue
        bl = losses.get((bench, h))
        if bl is None:
            continue
        shared = sorted(set(losses[(model, h)]) & set(bl))
        if len(shared) < min_obs:
            continue
        m = float(np.mean([losses[(model, h)][q] for q in shared]))
        b = float(np.mean([bl[q] for q in shared]))
        if b == 0.0:
            raise ValueError(f"benchmark MSFE zero at h={h}")
        out.append((model, h, m / b, len(shared)))
    return out


# -- in-sample incremental information ----------------------------------------


@dataclass(frozen=True)
class EtaRecord:
    country: str
    indicator: str
    horizon: int
    eta_hat: float
    std_err: float
    p_raw: float
    p_adjusted: float


def in_sample_eta(
    factory: DesignFactory,
    end_target: TargetRelease,
    grid: HorizonGrid,
    est_start: str,
    q: float = 0.05,
) -> tuple[list[EtaRecord], DiagnosticLog]:
    """Per-horizon double-lasso coefficient on each sentiment indicator,
    estimated over the full sample with final data; p-values adjusted per
    indicator across the horizon grid."""
    log = DiagnosticLog()
    raw: dict[str, list[tuple[int, object]]] = {}
    for h in grid.horizons:
        try:
            design = factory.build(
                end_target, h, est_start,
                y_asof="9999-12-31", include_target_row=True, with_prediction_row=False,
            )
        except ValueError as exc:
            log.add("insample", f"h={h}: design failed: {exc}")
            continue
        for topic in sorted(design.focal):
            try:
                res = double_lasso(design.X, design.focal[topic], design.y, horizon=h)
            except (ValueError, np.linalg.LinAlgError) as exc:
                log.add("insample", f"h={h} {topic}: inference failed: {exc}")
                continue
            raw.setdefault(topic, []).append((h, res))

    out: list[EtaRecord] = []
    for topic in sorted(raw):
        pairs = raw[topic]
        report = adjust_pvalues([r.p_value for _h, r in pairs], q=q)
        for (h, res), adj in zip(pairs, report.p_adjusted):
            out.append(
                EtaRecord(
                    country=factory.country,
                    indicator=topic,
                    horizon=h,
                    eta_hat=res.eta_hat,
                    std_err=res.std_err,
                    p_raw=res.p_value,
                    p_adjusted=float(adj),
                )
            )
    return out, log


# -- persistence --------------------------------------------------------------


def write_forecast_csv(
    path: str | Path, records: list[ForecastRecord], header_note: str | None = None
) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        fh.write("model,country,target,horizon,forecast_date,prediction,realized\n")
        for r in records:
            fh.write(
                f"{r.model},{r.country},{r.target},{r.horizon},{r.forecast_date},"
                f"{format(r.prediction, '.10g')},{format(r.realized, '.10g')}\n"
            )


def read_forecast_csv(path: str | Path) -> list[ForecastRecord]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.strip()
            if not line or line.startswith("#") or line.startswith("model,"):
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise ValueError(f"{path}:{lineno}: expected 7 columns")
            out.append(
                ForecastRecord(
                    model=parts[0],
                    country=parts[1],
                    target=parts[2],
                    horizon=int(parts[3]),
                    forecast_date=parts[4],
                    prediction=float(parts[5]),
                    realized=float(parts[6]),
                )
            )
    return out
