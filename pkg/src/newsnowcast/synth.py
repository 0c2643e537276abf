"""Synthetic corpus and economy fixture.

One country (DE). A persistent monthly factor drives both the tone of
template news sentences about one planted topic and, an adjustable lead
ahead, GDP growth; surveys load on a second factor so the benchmark has
real skill to beat. Everything is deterministic in the master seed.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import dates
from .vintages import gdp_release_date, monthly_release_date, survey_release_date

COUNTRY = "DE"
OUTLET = "synthetic-daily"
FIRST_DATA_MONTH = "1994-07"
FIRST_GDP_QUARTER = "1994Q3"
CORPUS_START = "1995-01-01"
CORPUS_END = "2019-12-31"
LAST_QUARTER = "2019Q4"
ARTICLES_PER_DAY = 3

PLANTED_TOPIC = "economy"
NOISE_TOPICS = ("finsector", "inflation", "manuf", "monpol", "unemployment")

_POSITIVE = (
    "The German economy is improving.",
    "The German economy is strengthening.",
    "The German economy is recovering steadily.",
    "The German economy is improving sharply.",
)
_NEGATIVE = (
    "The German economy is deteriorating.",
    "The German economy is weakening.",
    "The German economy is deteriorating sharply.",
    "The German economy is struggling.",
)
_NOISE_SENTENCES = {
    "finsector": ("The banking sector is expanding.", "The banking sector is contracting."),
    "inflation": ("Inflation is rising.", "Inflation is falling."),
    "manuf": ("Industrial production is growing.", "Industrial production is shrinking."),
    "monpol": ("Monetary policy is easing.", "Monetary policy is tightening."),
    "unemployment": ("Unemployment is falling.", "Unemployment is rising."),
}
_FILLERS = (
    "The weekly report was published on Tuesday.",
    "Trading volumes were little changed.",
    "The committee will meet again next month.",
    "Officials declined to comment on the figures.",
)


def _rng(seed: int, label: str) -> np.random.Generator:
    tag = int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


def _ar1(rng: np.random.Generator, n: int, rho: float, burn: int = 120) -> np.ndarray:
    e = rng.standard_normal(n + burn)
    x = np.empty(n + burn)
    x[0] = e[0]
    scale = math.sqrt(1.0 - rho * rho)
    for t in range(1, n + burn):
        x[t] = rho * x[t - 1] + scale * e[t]
    return x[burn:]


def _month_list(first: str, last: str) -> list[str]:
    i0, i1 = dates.month_index(first), dates.month_index(last)
    return [dates.month_from_index(i) for i in range(i0, i1 + 1)]


def _quarter_means(months: list[str], values: np.ndarray) -> dict[str, float]:
    byq: dict[str, list[float]] = {}
    for m, v in zip(months, values):
        byq.setdefault(dates.quarter_of_month(m), []).append(float(v))
    return {q: sum(vs) / len(vs) for q, vs in byq.items() if len(vs) == 3}


def generate_fixture(
    out_dir: str | Path,
    seed: int,
    lead_quarters: int = 2,
    snr: float = 2.0,
    mu: float = 2.0,
    gamma: float = 1.0,
    sigma_eps: float = 0.8,
    rho_news: float = 0.95,
    rho_survey: float = 0.9,
) -> dict[str, Path]:
    """Write corpus.jsonl, vintages.csv, regimes.csv and config.yaml.

    snr fixes the ratio of news-factor variance to all other variance in
    GDP growth; snr = 0 removes the planted signal entirely.
    """
    if seed is None:
        raise ValueError("seed is required")
    if lead_quarters < 0 or snr < 0:
        raise ValueError("lead_quarters and snr must be nonnegative")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    months = _month_list(FIRST_DATA_MONTH, "2019-12")
    n_m = len(months)
    x = _ar1(_rng(seed, "news-factor"), n_m, rho_news)
    u = _ar1(_rng(seed, "survey-factor"), n_m, rho_survey)
    f = np.tanh(0.8 * x)
    month_pos = {m: i for i, m in enumerate(months)}

    fbar = _quarter_means(months, f)
    ubar = _quarter_means(months, u)

    quarters = dates.quarter_range(FIRST_GDP_QUARTER, LAST_QUARTER)
    growth_qs = quarters[1:]  # growth defined from the second level on
    var_f = float(np.var(np.array([fbar[q] for q in growth_qs if q in fbar])))
    var_rest = gamma * gamma * float(
        np.var(np.array([ubar[q] for q in growth_qs]))
    ) + sigma_eps * sigma_eps
    beta = math.sqrt(snr * var_rest / var_f) if snr > 0 else 0.0

    eps = _rng(seed, "gdp-noise").standard_normal(len(growth_qs))
    growth: dict[str, float] = {}
    for i, q in enumerate(growth_qs):
        lagged = dates.shift_quarter(q, -lead_quarters)
        news = beta * fbar[lagged] if lagged in fbar else 0.0
        growth[q] = mu + news + gamma * ubar[q] + sigma_eps * float(eps[i])

    levels: dict[str, float] = {quarters[0]: 100.0}
    for prev, q in zip(quarters, growth_qs):
        levels[q] = levels[prev] * math.exp(growth[q] / 400.0)

    # -- vintages ------------------------------------------------------------
    rows: list[tuple[str, str, str, str, float, str]] = []
    for q in quarters:
        rows.append(("gdp", COUNTRY, "quarterly", q, levels[q], gdp_release_date(q)))

    rng_ip = _rng(seed, "macro-ip")
    rng_orders = _rng(seed, "macro-orders")
    ip_growth = 0.002 + 0.004 * rng_ip.standard_normal(n_m)
    orders_growth = 0.001 + 0.006 * rng_orders.standard_normal(n_m)
    ip_level = 100.0 * np.exp(np.cumsum(ip_growth))
    orders_level = 100.0 * np.exp(np.cumsum(orders_growth))
    rate = 3.0 + _ar1(_rng(seed, "macro-rate"), n_m, 0.98)
    for i, m in enumerate(months):
        rows.append(("macro_ip", COUNTRY, "monthly", m, float(ip_level[i]), monthly_release_date(m)))
        rows.append(("macro_orders", COUNTRY, "monthly", m, float(orders_level[i]), monthly_release_date(m)))
        rows.append(("macro_rate", COUNTRY, "monthly", m, float(rate[i]), monthly_release_date(m)))
    # one revised vintage so revision handling is exercised downstream
    revised_month = "2008-03"
    i_rev = month_pos[revised_month]
    first_release = monthly_release_date(revised_month)
    late = dates.parse_date(first_release).toordinal() + 60
    rows.append(
        (
            "macro_ip", COUNTRY, "monthly", revised_month,
            float(ip_level[i_rev] * 1.01), dt.date.fromordinal(late).isoformat(),
        )
    )

    rng_sv = _rng(seed, "surveys")
    for j in range(1, 7):
        noise = rng_sv.standard_normal(n_m)
        for i, m in enumerate(months):
            rows.append(
                (
                    f"survey{j}", COUNTRY, "monthly", m,
                    float(u[i] + 0.5 * noise[i]), survey_release_date(m),
                )
            )

    vintages_path = out / "vintages.csv"
    with vintages_path.open("w", encoding="utf-8") as fh:
        fh.write("series_id,country,frequency,period,value,release_date\n")
        for sid, country, freq, period, value, release in rows:
            fh.write(f"{sid},{country},{freq},{period},{format(value, '.10g')},{release}\n")

    # -- regimes -------------------------------------------------------------
    regime_quarters = [q for q in growth_qs if q >= "1995Q1"]
    spans: list[tuple[str, str, str]] = []
    for q in regime_quarters:
        label = "recession" if growth[q] < 0 else "expansion"
        start = dates.quarter_start(q).isoformat()
        end = dates.quarter_end(q).isoformat()
        if spans and spans[-1][2] == label and spans[-1][1] < start:
            spans[-1] = (spans[-1][0], end, label)
        else:
            spans.append((start, end, label))
    regimes_path = out / "regimes.csv"
    with regimes_path.open("w", encoding="utf-8") as fh:
        fh.write("start,end,label\n")
        for start, end, label in spans:
            fh.write(f"{start},{end},{label}\n")

    # -- corpus --------------------------------------------------------------
    rng_news = _rng(seed, "corpus")
    corpus_path = out / "corpus.jsonl"
    day = dates.parse_date(CORPUS_START)
    last_day = dates.parse_date(CORPUS_END)
    n_noise = len(NOISE_TOPICS)
    with corpus_path.open("w", encoding="utf-8") as fh:
        day_index = 0
        while day <= last_day:
            m = dates.month_of(day)
            p_pos = 0.5 * (1.0 + float(f[month_pos[m]]))
            for k in range(ARTICLES_PER_DAY):
                if rng_news.random() < p_pos:
                    planted = _POSITIVE[int(rng_news.integers(len(_POSITIVE)))]
                else:
                    planted = _NEGATIVE[int(rng_news.integers(len(_NEGATIVE)))]
                topic = NOISE_TOPICS[(day_index * ARTICLES_PER_DAY + k) % n_noise]
                noise_sentence = _NOISE_SENTENCES[topic][int(rng_news.integers(2))]
                filler = _FILLERS[(day_index + k) % len(_FILLERS)]
                body = f"{planted} {noise_sentence} {filler}"
                record = {
                    "id": f"de-{day.isoformat()}-{k}",
                    "outlet": OUTLET,
                    "country": COUNTRY,
                    "date": day.isoformat(),
                    "title": f"Market report {day.isoformat()}",
                    "body": body,
                    "language": "en",
                }
                fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
            day = dt.date.fromordinal(day.toordinal() + 1)
            day_index += 1

    # -- config --------------------------------------------------------------
    config_path = out / "config.yaml"
    config_text = f"""# synthetic fixture, seed {seed}
country: {COUNTRY}
corpus: corpus.jsonl
vintages: vintages.csv
regimes: regimes.csv
output_dir: out
seed: {seed}
est_start: 1997Q1
oos_start: 2007Q1
oos_end: {LAST_QUARTER}
gdp_series: gdp
gdp_transform: annualized_qoq_growth
macro_series:
  macro_ip: pct_growth
  macro_orders: pct_growth
  macro_rate: first_diff
survey_series: [survey1, survey2, survey3, survey4, survey5, survey6]
horizons:
  min: 15
  max: 495
  step: 15
  nowcast_threshold: 165
fdr_q: 0.05
min_rows: 24
fluctuation_horizon: 165
"""
    config_path.write_text(config_text, encoding="utf-8")

    return {
        "corpus": corpus_path,
        "vintages": vintages_path,
        "regimes": regimes_path,
        "config": config_path,
    }
