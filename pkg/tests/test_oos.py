import math

import numpy as np
import pytest

from conftest import make_tiny_factory, make_tiny_store
from newsnowcast.design import FINAL_DATE, UmidasDesign
from newsnowcast.diagnostics import DiagnosticLog
from newsnowcast.lasso import lasso_fit, plugin_penalty
from newsnowcast.oos import (
    ForecastRecord,
    average_forecasts,
    forecast_cell,
    loss_diff_matrix,
    msfe_table,
    read_forecast_csv,
    run_oos,
    squared_losses,
    write_forecast_csv,
)
from newsnowcast.vintages import HorizonGrid, TargetRelease


def _design(seed=31, n=40, p=6, topics=("economy",)):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    y = X[:, 0] * 1.2 + rng.standard_normal(n)
    focal = {t: rng.standard_normal(n) * 0.4 for t in topics}
    return UmidasDesign(
        country="DE", horizon=30, target_quarter="2008Q4",
        quarters=tuple(f"q{i}" for i in range(n)),
        y=y, X=X, labels=tuple(f"c{j}" for j in range(p)),
        focal=focal, x_new=rng.standard_normal(p),
        focal_new={t: 0.1 for t in topics},
        provenance=(), col_mean=np.zeros(p), col_sd=np.ones(p),
    )


def _ols_pred(F, y, f_new):
    Z = np.column_stack([F, np.ones(len(y))])
    coef, *_ = np.linalg.lstsq(Z, y, rcond=None)
    return float(np.append(f_new, 1.0) @ coef)


def test_forecast_cell_matches_direct_least_squares():
    d = _design()
    preds = forecast_cell(d)
    assert set(preds) == {"ARX", "ARXS:economy"}

    yc = d.y - d.y.mean()
    sel_y = sorted(lasso_fit(d.X, yc, plugin_penalty(d.X, yc)).active)
    assert math.isclose(preds["ARX"], _ols_pred(d.X[:, sel_y], d.y, d.x_new[sel_y]))

    s = d.focal["economy"]
    sc = (s - s.mean()) / s.std()
    sel_s = sorted(lasso_fit(d.X, sc, plugin_penalty(d.X, sc)).active)
    union = sorted(set(sel_y) | set(sel_s))
    F = np.column_stack([s, d.X[:, union]])
    f_new = np.append(d.focal_new["economy"], d.x_new[union])
    assert math.isclose(preds["ARXS:economy"], _ols_pred(F, d.y, f_new))


def test_forecast_cell_skips_constant_sentiment():
    d = _design(topics=("economy", "flat"))
    d.focal["flat"][:] = 0.25
    log = DiagnosticLog()
    preds = forecast_cell(d, log)
    assert "ARXS:flat" not in preds and "ARXS:economy" in preds
    assert any("flat" in str(m) for m in log)


def _rec(model, target, h, pred, realized=1.0, country="DE"):
    return ForecastRecord(model=model, country=country, target=target,
                          horizon=h, forecast_date="2008-01-01",
                          prediction=pred, realized=realized)


def test_average_forecasts_requires_full_membership():
    recs = [
        _rec("ARX", "2008Q1", 30, 0.0),
        _rec("ARXS:a", "2008Q1", 30, 1.0),
        _rec("ARXS:b", "2008Q1", 30, 3.0),
        _rec("ARXS:a", "2008Q2", 30, 2.0),  # b missing here
    ]
    log = DiagnosticLog()
    avg = average_forecasts(recs, log)
    assert len(avg) == 1
    assert avg[0].model == "AVERAGE" and avg[0].target == "2008Q1"
    assert math.isclose(avg[0].prediction, 2.0)
    assert len(log) == 1 and "missing" in str(log.records[0])
    assert average_forecasts([_rec("ARX", "2008Q1", 30, 0.0)]) == []


def test_squared_losses_and_alignment():
    recs = [
        _rec("ARX", "2008Q1", 30, 1.0, realized=2.0),
        _rec("ARX", "2008Q2", 30, 2.0, realized=2.0),
        _rec("M", "2008Q1", 30, 1.5, realized=2.0),
        _rec("M", "2008Q2", 30, 2.5, realized=2.0),
        _rec("M", "2008Q3", 30, 9.0, realized=2.0),  # no benchmark here
    ]
    losses = squared_losses(recs)
    assert losses[("ARX", 30)]["2008Q1"] == 1.0
    panel = loss_diff_matrix(recs, "M", [30])
    assert panel.origins == ("2008Q1", "2008Q2")
    assert np.allclose(panel.diffs[:, 0], [1.0 - 0.25, 0.0 - 0.25])
    with pytest.raises(ValueError):
        loss_diff_matrix(recs, "missing", [30])

    table = msfe_table(recs, min_obs=2)
    assert table == [("M", 30, ((0.25 + 0.25) / 2) / ((1.0 + 0.0) / 2), 2)]


def test_forecast_csv_round_trip(tmp_path):
    recs = [_rec("ARX", "2008Q1", 30, 1.25, realized=-0.5),
            _rec("ARXS:economy", "2008Q1", 30, 0.0625)]
    p = tmp_path / "forecasts.csv"
    write_forecast_csv(p, recs, header_note="run meta")
    back = read_forecast_csv(p)
    assert back == recs
    assert p.read_text(encoding="utf-8").startswith("# run meta\n")
    bad = tmp_path / "bad.csv"
    bad.write_text("model,country\nARX,DE\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_forecast_csv(bad)


GRID = HorizonGrid(min_h=30, max_h=90, step=30)


def _targets(factory, quarters):
    out = []
    for q in quarters:
        out.append(TargetRelease(
            country=factory.country, quarter=q,
            release_date=factory.release_date_of(q), value=math.nan,
        ))
    return out


def test_run_oos_full_coverage_and_audit(tiny_factory):
    quarters = [f"2008Q{k}" for k in (1, 2, 3, 4)]
    res = run_oos(tiny_factory, _targets(tiny_factory, quarters), GRID, "2001Q1")
    models = {"ARX", "ARXS:economy", "AVERAGE"}
    assert set(r.model for r in res.records) == models
    # every cell present: 4 targets x 3 horizons x 3 models
    assert len(res.records) == 36
    assert res.audit_checked > 0 and res.audit_violations == []
    # realized is the first release of the target quarter
    flash = {}
    for t in _targets(tiny_factory, quarters):
        flash[t.quarter] = tiny_factory.y_value(t.quarter, t.release_date)[0]
    for r in res.records:
        assert math.isclose(r.realized, flash[r.target])


def test_run_oos_final_vintage_changes_realized(tiny_factory):
    quarters = ["2008Q1", "2008Q2", "2008Q3", "2008Q4"]
    targets = _targets(tiny_factory, quarters)
    flash = run_oos(tiny_factory, targets, GRID, "2001Q1", audit=False)
    factory2 = make_tiny_factory(make_tiny_store())
    final = run_oos(factory2, targets, GRID, "2001Q1", audit=False,
                    realized_vintage="final")
    f = {(r.model, r.target, r.horizon): r.realized for r in flash.records}
    g = {(r.model, r.target, r.horizon): r.realized for r in final.records}
    assert set(f) == set(g)
    assert any(not math.isclose(f[k], g[k]) for k in f)
    for k in g:
        q = k[1]
        assert math.isclose(g[k], factory2.y_value(q, FINAL_DATE)[0])
    with pytest.raises(ValueError):
        run_oos(tiny_factory, targets, GRID, "2001Q1", realized_vintage="best")


def test_run_oos_skips_underivable_targets(tiny_factory):
    quarters = ["2008Q4", "2010Q1"]  # 2010Q1 is outside the store
    targets = [TargetRelease(country="DE", quarter=q,
                             release_date="2010-05-16" if q == "2010Q1"
                             else tiny_factory.release_date_of(q), value=math.nan)
               for q in quarters]
    res = run_oos(tiny_factory, targets, GRID, "2001Q1", audit=False)
    assert {r.target for r in res.records} == {"2008Q4"}
    assert any("2010Q1" in str(m) for m in res.log)


def test_run_oos_parallel_matches_sequential(tiny_factory):
    quarters = ["2008Q1", "2008Q2", "2008Q3", "2008Q4"]
    targets = _targets(tiny_factory, quarters)
    seq = run_oos(tiny_factory, targets, GRID, "2001Q1")
    factory2 = make_tiny_factory(make_tiny_store())
    par = run_oos(factory2, targets, GRID, "2001Q1", jobs=2)
    assert seq.records == par.records
    assert seq.audit_checked == par.audit_checked
    assert [str(m) for m in seq.log] == [str(m) for m in par.log]
