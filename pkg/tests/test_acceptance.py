"""Acceptance gate: ten end-of-build checks, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s``. Each test times
itself against its stated budget, prints a single summary line, and
fails loudly if either the property or the budget is violated.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import math
import random
import re
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from newsnowcast.corpus import RawArticle
from newsnowcast.design import DesignAuditor, DesignFactory
from newsnowcast.fcompare import aspa_test, fluctuation_test
from newsnowcast.gazetteer import default_gazetteer
from newsnowcast.inference import double_lasso
from newsnowcast.lasso import lasso_fit
from newsnowcast.lexicon import default_lexicon
from newsnowcast.multitest import adjust_pvalues
from newsnowcast.parsing import Token, shallow_parse
from newsnowcast.scoring import score_article, score_chunk
from newsnowcast.topics import TopicSpec, default_topics
from newsnowcast.vintages import TargetRelease, load_vintages

FIXTURE_SEED = 11


def _report(num: int, detail: str, elapsed: float, limit: float) -> None:
    line = f"criterion {num}: PASS — {detail} ({elapsed:.1f}s, limit {limit:.0f}s)"
    print(line)
    assert elapsed < limit, f"criterion {num} exceeded runtime budget: {elapsed:.1f}s"


def _csv_rows(path: Path) -> list[list[str]]:
    rows = []
    for line in path.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        rows.append(line.split(","))
    return rows[1:]  # drop the column header


# -- criterion 1: aspect scoring micro-check ----------------------------------


def test_criterion_1_aspect_sentence():
    t0 = time.perf_counter()
    text = (
        "The French economy has been experiencing its worst recession since "
        "1968, while Italy entered into recession with a GDP drop ..."
    )
    article = RawArticle("c1", "daily-fr", "FR", dt.date(2020, 9, 9), "", text, "fr")
    scores = score_article(
        article,
        [shallow_parse(text, "c1", 0)],
        default_topics(),
        default_lexicon(),
        default_gazetteer(),
    )
    hits = [s for s in scores if s.topic == "economy" and s.country == "FR"]
    assert len(hits) == 1, f"expected one (economy, FR) score, got {hits}"
    assert hits[0].score <= -0.5, f"score not negative enough: {hits[0].score}"
    _report(
        1,
        f"one (economy, FR) score = {hits[0].score:.2f} <= -0.5",
        time.perf_counter() - t0,
        1.0,
    )


# -- criterion 2: lexicon and rule properties, 10k fuzz -----------------------


def _chunk_case(rng: random.Random, lex, scored_pool, intens_pool, neg_pool):
    """Random chunk: scored words, optional intensifier children, negators."""
    n = rng.randint(1, 6)
    tokens = []
    idx = 1
    word_ids = []
    for _ in range(n):
        lemma = rng.choice(scored_pool)
        tokens.append(Token(idx, lemma, lemma, "VERB", 0, "root"))
        word_ids.append(idx)
        idx += 1
    for _ in range(rng.randint(0, 2)):
        lemma = rng.choice(intens_pool)
        tokens.append(Token(idx, lemma, lemma, "ADV", rng.choice(word_ids), "advmod"))
        idx += 1
    for _ in range(rng.randint(0, 2)):
        lemma = rng.choice(neg_pool)
        tokens.append(Token(idx, lemma, lemma, "PART", rng.choice(word_ids), "neg"))
        idx += 1
    return tokens, idx


def test_criterion_2_rule_fuzz():
    t0 = time.perf_counter()
    lex = default_lexicon()
    plus = TopicSpec("plus", frozenset({("x",)}), (), keyword_tone=1)
    minus = TopicSpec("minus", frozenset({("x",)}), (), keyword_tone=-1)
    scored_pool = sorted(lex.entries)
    intens_pool = sorted(set(lex.intensifiers) - set(lex.entries))
    neg_pool = sorted(lex.negators - set(lex.entries) - set(lex.intensifiers))
    rng = random.Random(20260822)
    cases = 0

    for _ in range(4000):  # score stays in range
        chunk, _ = _chunk_case(rng, lex, scored_pool, intens_pool, neg_pool)
        assert -1.0 <= score_chunk(chunk, plus, lex) <= 1.0
        cases += 1

    for _ in range(3000):  # one extra negator flips the score exactly
        chunk, nxt = _chunk_case(rng, lex, scored_pool, intens_pool, neg_pool)
        base = score_chunk(chunk, plus, lex)
        flipped = score_chunk(
            chunk + [Token(nxt, "not", rng.choice(neg_pool), "PART", chunk[0].index, "neg")],
            plus,
            lex,
        )
        assert flipped == pytest.approx(-base, abs=0.0), (base, flipped)
        cases += 1

    for _ in range(2000):  # keyword tone is an exact sign change
        chunk, _ = _chunk_case(rng, lex, scored_pool, intens_pool, neg_pool)
        assert score_chunk(chunk, minus, lex) == pytest.approx(
            -score_chunk(chunk, plus, lex), abs=0.0
        )
        cases += 1

    # rising rates read as positive sentiment under the shipped dictionary
    topics = default_topics()
    gaz = default_gazetteer()
    up_verbs = [w for w in ("rise", "grow", "climb", "improve", "recover", "strengthen")
                if (lex.score(w) or 0) > 0]
    assert up_verbs, "no positive direction verbs in the dictionary"
    boosters = ["", " sharply", " strongly", " significantly"]
    art = RawArticle("c2", "daily-de", "DE", dt.date(2020, 1, 1), "", "", "en")
    for i in range(1000):
        verb = up_verbs[i % len(up_verbs)]
        text = f"Interest rates will {verb}{boosters[i % len(boosters)]}."
        sent = shallow_parse(text, "c2", 0)
        got = [s for s in score_article(art, [sent], topics, lex, gaz) if s.topic == "monpol"]
        assert got and got[0].score > 0.0, f"{text!r} -> {got}"
        cases += 1

    assert cases == 10000
    _report(2, f"{cases} fuzz cases over four rule families", time.perf_counter() - t0, 30.0)


# -- criterion 3: coordinate descent vs closed form ---------------------------


def test_criterion_3_lasso_oracle():
    t0 = time.perf_counter()
    n, p = 64, 16
    for seed in range(100):
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.standard_normal((n, p)))
        y = rng.standard_normal(n)
        b = q.T @ y
        lam = float(rng.uniform(0.001, 0.05))
        beta = lasso_fit(q, y, lam).coef
        # orthonormal columns: argmin is the soft-thresholded correlation
        closed = np.sign(b) * np.maximum(np.abs(b) - n * lam, 0.0)
        assert np.max(np.abs(beta - closed)) < 1e-8, f"seed {seed}"

        ols = np.linalg.lstsq(q, y, rcond=None)[0]
        assert np.max(np.abs(lasso_fit(q, y, 0.0).coef - ols)) < 1e-6

        lam_max = float(np.max(np.abs(b))) / n
        assert not lasso_fit(q, y, lam_max * 1.000001).active
    _report(3, "100 orthonormal designs match soft-thresholding", time.perf_counter() - t0, 10.0)


# -- criterion 4: double-lasso coverage and size ------------------------------


def _dl_mc(eta: float, reps: int, seed: int) -> tuple[float, float]:
    n, p, k = 200, 50, 5
    gamma = np.zeros(p)
    gamma[:k] = 1.0
    delta = np.zeros(p)
    delta[:k] = 1.0
    cover = 0
    reject = 0
    rng = np.random.default_rng(seed)
    for _ in range(reps):
        X = rng.standard_normal((n, p))
        s = X @ delta + rng.standard_normal(n)
        y = eta * s + X @ gamma + rng.standard_normal(n)
        res = double_lasso(X, s, y)
        if abs(res.eta_hat - eta) <= 1.959963985 * res.std_err:
            cover += 1
        if res.p_value < 0.05:
            reject += 1
    return cover / reps, reject / reps


def test_criterion_4_double_lasso_mc():
    t0 = time.perf_counter()
    reps = 2000
    coverage, _ = _dl_mc(eta=1.0, reps=reps, seed=41)
    _, size = _dl_mc(eta=0.0, reps=reps, seed=42)
    assert 0.92 <= coverage <= 0.98, f"coverage {coverage}"
    assert 0.03 <= size <= 0.07, f"size {size}"
    _report(
        4,
        f"coverage {coverage:.3f} in [.92,.98], size {size:.3f} in [.03,.07] ({reps} reps each)",
        time.perf_counter() - t0,
        300.0,
    )


# -- criterion 5: adaptive FDR hand example -----------------------------------


def test_criterion_5_fdr_hand_example():
    t0 = time.perf_counter()
    p = [0.001, 0.008, 0.039, 0.041, 0.09, 0.7]
    rep = adjust_pvalues(p, q=0.05)
    assert rep.rejected == (True, True, True, True, False, False), rep.rejected
    expected = [0.0042, 0.0168, 0.04305, 0.04305, 0.0756, 0.49]
    assert np.allclose(rep.p_adjusted, expected, atol=1e-12), rep.p_adjusted

    zeros = adjust_pvalues([0.0] * 7, q=0.05)
    assert all(zeros.rejected) and all(a == 0.0 for a in zeros.p_adjusted)
    ones = adjust_pvalues([1.0] * 7, q=0.05)
    assert not any(ones.rejected) and all(a == 1.0 for a in ones.p_adjusted)
    _report(5, "6-vector example exact; all-zero/all-one edges", time.perf_counter() - t0, 1.0)


# -- criterion 6: aSPA size and power -----------------------------------------


def test_criterion_6_aspa_size_power():
    t0 = time.perf_counter()
    runs, T = 1000, 52
    rng = np.random.default_rng(6001)
    rej_null = 0
    rej_alt = 0
    for i in range(runs):
        d = rng.standard_normal(T)
        if aspa_test(d, seed=i).p_value < 0.05:
            rej_null += 1
        if aspa_test(d + 1.0, seed=runs + i).p_value < 0.05:
            rej_alt += 1
    size = rej_null / runs
    power = rej_alt / runs
    assert 0.03 <= size <= 0.07, f"size {size}"
    assert power > 0.80, f"power {power}"
    _report(
        6,
        f"size {size:.3f} in [.03,.07], power {power:.2f} > .80 (T={T}, {runs} runs)",
        time.perf_counter() - t0,
        300.0,
    )


# -- criterion 7: fluctuation path length and localization --------------------


def test_criterion_7_fluctuation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7001)
    for T in (52, 60, 90):
        w = math.ceil(0.2 * T)
        res = fluctuation_test(rng.standard_normal(T), mu=0.2)
        assert len(res.stats) == T - w + 1, (T, w, len(res.stats))

    T, sims, hits = 90, 200, 0
    lo, hi = T / 3, 2 * T / 3
    for _ in range(sims):
        d = rng.standard_normal(T)
        d[T // 3: 2 * T // 3] += 2.0
        res = fluctuation_test(d, mu=0.2)
        if lo <= res.centers[res.argmax] < hi:
            hits += 1
    rate = hits / sims
    assert rate >= 0.90, f"localization rate {rate}"
    _report(
        7,
        f"path length T-w+1 checked; mid-third localization {rate:.2f} >= .90",
        time.perf_counter() - t0,
        120.0,
    )


# -- shared end-to-end pipeline for criteria 8-10 -----------------------------


def _run_cli(args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "newsnowcast.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def _run_pipeline(root: Path) -> tuple[Path, str, float]:
    t0 = time.perf_counter()
    r = _run_cli(["synth", "--out", str(root), "--seed", str(FIXTURE_SEED)])
    assert r.returncode == 0, r.stderr
    r = _run_cli(["forecast", "--config", str(root / "config.yaml")])
    assert r.returncode == 0, r.stderr + r.stdout
    return root / "out", r.stdout, time.perf_counter() - t0


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("e2e")
    out, stdout, elapsed = _run_pipeline(root / "run1")
    return {"root": root, "out": out, "stdout": stdout, "elapsed": elapsed}


def test_criterion_8_lookahead_audit(pipeline):
    t0 = time.perf_counter()
    m = re.search(r"audit_cells=(\d+)", pipeline["stdout"])
    assert m and int(m.group(1)) > 0, pipeline["stdout"]
    checked = int(m.group(1))

    # corruption at the file level: a release date before the period ends
    src = pipeline["root"] / "run1" / "vintages.csv"
    lines = src.read_text().splitlines()
    for i, line in enumerate(lines):
        if line.startswith("gdp,DE,quarterly,2005Q1,"):
            parts = line.split(",")
            parts[5] = "2005-03-01"  # inside the quarter
            lines[i] = ",".join(parts)
            break
    else:
        pytest.fail("no gdp row found to corrupt")
    bad = pipeline["root"] / "corrupt.csv"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError):
        load_vintages(bad)

    # corruption the loader cannot see: release pulled 30 days earlier but
    # still after the quarter; the audit compares designs against the store
    store = load_vintages(src)

    def factory_from(st):
        return DesignFactory(
            country="DE",
            gdp=st.get("gdp", "DE"),
            macro=[
                (st.get("macro_ip", "DE"), "pct_growth"),
                (st.get("macro_orders", "DE"), "pct_growth"),
                (st.get("macro_rate", "DE"), "first_diff"),
            ],
            surveys=[st.get(f"survey{i}", "DE") for i in range(1, 7)],
            sentiments={},
        )

    clean = factory_from(store)
    target_q = "2015Q1"
    target = TargetRelease("DE", target_q, clean.release_date_of(target_q), 0.0)
    design = clean.build(target, 165, "1997Q1")

    doctored = load_vintages(src)
    key = ("gdp", "DE")
    gdp = doctored.series[key]
    obs = []
    for period, value, release in gdp.observations:
        if period == "2010Q1":
            release = (dt.date.fromisoformat(release) - dt.timedelta(days=30)).isoformat()
        obs.append((period, value, release))
    doctored.series[key] = dataclasses.replace(gdp, observations=tuple(sorted(obs, key=lambda o: (o[0], o[2]))))
    report = DesignAuditor(factory_from(doctored)).audit(design)
    assert not report.passed and report.violations, "doctored release went unnoticed"

    _report(
        8,
        f"{checked} cells audited clean; both corruption routes caught",
        time.perf_counter() - t0,
        120.0,
    )


def test_criterion_9_planted_signal(pipeline):
    out = pipeline["out"]
    ratios: dict[tuple[str, int], float] = {}
    for model, _country, h, _subset, ratio, _n, _pa in _csv_rows(out / "msfe.csv"):
        ratios[(model, int(h))] = float(ratio)

    econ_long = {h: r for (m, h), r in ratios.items() if m == "ARXS:economy" and h > 165}
    assert econ_long and all(r < 1.0 for r in econ_long.values()), econ_long

    pvals = {
        (sent, subset): float(p)
        for _c, sent, subset, p in _csv_rows(out / "evaluation.csv")
    }
    assert pvals[("economy", "forecast")] < 0.05, pvals
    noise = ("finsector", "inflation", "manuf", "monpol", "unemployment")
    for topic in noise:
        assert pvals[(topic, "forecast")] > 0.10, (topic, pvals[(topic, "forecast")])

    horizons = sorted({h for (_m, h) in ratios})
    for h in horizons:
        worst = max(
            r for (m, hh), r in ratios.items() if hh == h and m.startswith("ARXS:")
        )
        avg = ratios[("AVERAGE", h)]
        assert avg <= worst * 1.05, (h, avg, worst)

    _report(
        9,
        f"economy MSFE<1 at all h>165 (min {min(econ_long.values()):.2f}), "
        f"aSPA p={pvals[('economy', 'forecast')]:.3f}, noise p>0.10, "
        "AVERAGE within 5% of worst",
        pipeline["elapsed"],
        900.0,
    )


def test_criterion_10_determinism(pipeline):
    t0 = time.perf_counter()
    out2, _stdout, _ = _run_pipeline(pipeline["root"] / "run2")
    names = ["vintages.csv", "regimes.csv"]
    for name in names:
        a = (pipeline["root"] / "run1" / name).read_bytes()
        b = (pipeline["root"] / "run2" / name).read_bytes()
        assert a == b, f"fixture file {name} differs between runs"
    outputs = ["forecasts.csv", "insample.csv", "msfe.csv", "evaluation.csv", "fluctuation.csv"]
    for name in outputs:
        a = (pipeline["out"] / name).read_bytes()
        b = (out2 / name).read_bytes()
        assert a == b, f"output {name} differs between runs"
    _report(
        10,
        f"{len(names) + len(outputs)} CSV outputs byte-identical across reruns",
        time.perf_counter() - t0,
        900.0,
    )
