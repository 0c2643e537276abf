"""Shared fixtures: a hand-sized vintage store for design tests and one
synthetic corpus fixture generated per session."""

import datetime as dt

import numpy as np
import pytest

from newsnowcast import dates
from newsnowcast.design import DesignFactory
from newsnowcast.synth import generate_fixture
from newsnowcast.vintages import (
    VintageSeries,
    VintageStore,
    gdp_release_date,
    indicator_to_vintages,
    monthly_release_date,
)


def _month_span(first: str, last: str) -> list[str]:
    out = [first]
    while out[-1] != last:
        out.append(dates.shift_month(out[-1], 1))
    return out


def make_tiny_store(country: str = "DE", seed: int = 5) -> VintageStore:
    """One country, 1999Q1..2009Q4: gdp plus three macro series, six
    surveys, and one monthly sentiment indicator. Single release per
    observation except gdp, which gets a revised vintage one quarter later."""
    rng = np.random.default_rng(seed)
    store = VintageStore()

    quarters = dates.quarter_range("1998Q3", "2009Q4")
    level = 100.0
    gdp_obs = []
    for q in quarters:
        level *= 1.0 + 0.005 + 0.004 * rng.standard_normal()
        first = gdp_release_date(q)
        revised = (dates.parse_date(first) + dt.timedelta(days=90)).isoformat()
        gdp_obs.append((q, round(level, 6), first))
        gdp_obs.append(
            (q, round(level * (1.0 + 0.001 * rng.standard_normal()), 6), revised)
        )
    store.add(VintageSeries(
        series_id="gdp", country=country, frequency=dates.QUARTERLY,
        observations=tuple(sorted(gdp_obs, key=lambda o: (o[0], o[2]))),
    ))

    months = _month_span("1998-07", "2009-12")
    for sid in ("macro_ip", "macro_orders"):
        lvl = 100.0
        obs = []
        for m in months:
            lvl *= 1.0 + 0.002 + 0.01 * rng.standard_normal()
            obs.append((m, round(lvl, 6), monthly_release_date(m)))
        store.add(VintageSeries(
            series_id=sid, country=country, frequency=dates.MONTHLY,
            observations=tuple(obs),
        ))
    rate = 3.0
    obs = []
    for m in months:
        rate += 0.05 * rng.standard_normal()
        obs.append((m, round(rate, 6), monthly_release_date(m)))
    store.add(VintageSeries(
        series_id="macro_rate", country=country, frequency=dates.MONTHLY,
        observations=tuple(obs),
    ))

    for k in range(1, 7):
        vals = [(m, round(float(rng.standard_normal()), 6)) for m in months]
        store.add(indicator_to_vintages(
            f"survey{k}", country, dates.MONTHLY, vals, release_for="survey",
        ))

    vals = [(m, round(float(np.tanh(rng.standard_normal())), 6)) for m in months]
    store.add(indicator_to_vintages(
        "sent_economy", country, dates.MONTHLY, vals, release_for="sentiment",
    ))
    return store


def make_tiny_factory(store: VintageStore, country: str = "DE") -> DesignFactory:
    return DesignFactory(
        country=country,
        gdp=store.get("gdp", country),
        macro=[
            (store.get("macro_ip", country), "pct_growth"),
            (store.get("macro_orders", country), "pct_growth"),
            (store.get("macro_rate", country), "first_diff"),
        ],
        surveys=[store.get(f"survey{k}", country) for k in range(1, 7)],
        sentiments={"economy": store.get("sent_economy", country)},
    )


@pytest.fixture(scope="session")
def tiny_store():
    return make_tiny_store()


@pytest.fixture()
def tiny_factory(tiny_store):
    # fresh factory per test: the row cache is mutable state
    return make_tiny_factory(tiny_store)


@pytest.fixture(scope="session")
def synth_fixture(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthfix")
    return generate_fixture(out, seed=7)
