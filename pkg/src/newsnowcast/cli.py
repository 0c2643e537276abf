"""Command line front end: corpus to indicators to forecasts to evaluation.

Every subcommand validates its inputs fully before writing anything, puts
its outputs under the configured output directory, and stamps each output
with a provenance header. Exit codes: 0 success, 1 fatal problem, 2 run
finished but some cells were skipped (see the diagnostics file).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from itertools import groupby
from pathlib import Path

from . import dates
from .config import ExperimentConfig, load_config, metadata_header
from .corpus import ingest_corpus, iter_article_sentences
from .design import DesignFactory
from .diagnostics import DiagnosticLog
from .fcompare import aspa_test, fluctuation_test, pa_test
from .gazetteer import default_gazetteer, load_gazetteer
from .indicators import (
    aggregate_daily,
    cross_correlations,
    load_regimes,
    regime_density,
    resample,
    standardize,
    write_indicator_csv,
)
from .lexicon import default_lexicon, load_lexicon
from .oos import (
    AVERAGE,
    BENCHMARK,
    in_sample_eta,
    loss_diff_matrix,
    msfe_table,
    read_forecast_csv,
    run_oos,
    write_forecast_csv,
)
from .parsing import load_parsed, shallow_parse, write_parsed
from .scoring import score_article
from .synth import generate_fixture
from .topics import default_topics, load_topics
from .vintages import TargetRelease, indicator_to_vintages, load_vintages, write_vintages

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


class CliError(Exception):
    """Fatal problem with a clean one-line message."""


# -- shared loading steps -----------------------------------------------------


def _resources(cfg: ExperimentConfig):
    lex = load_lexicon(cfg.lexicon) if cfg.lexicon else default_lexicon()
    topics = load_topics(cfg.topics) if cfg.topics else default_topics()
    gaz = load_gazetteer(cfg.gazetteer) if cfg.gazetteer else default_gazetteer()
    return lex, topics, gaz


def _load_articles(cfg: ExperimentConfig, log: DiagnosticLog):
    articles = list(ingest_corpus(cfg.corpus, log))
    if not articles:
        raise CliError(f"no usable articles in {cfg.corpus}")
    return articles


def _score_corpus(cfg: ExperimentConfig, log: DiagnosticLog):
    """Sentence scores for the whole corpus, plus the articles read.

    Uses the configured parse file when there is one, otherwise the
    built-in shallow parser on segmented article text.
    """
    lex, topics, gaz = _resources(cfg)
    articles = _load_articles(cfg, log)
    by_id = {a.article_id: a for a in articles}
    scores = []
    if cfg.parses:
        grouped: dict[str, list] = {}
        for sent in load_parsed(cfg.parses, log, known_ids=set(by_id)):
            grouped.setdefault(sent.article_id, []).append(sent)
        for aid in sorted(grouped):
            scores.extend(score_article(by_id[aid], grouped[aid], topics, lex, gaz))
    else:
        for art in articles:
            sents = [
                shallow_parse(text, art.article_id, i)
                for i, text in iter_article_sentences(art, cfg.score_titles)
            ]
            scores.extend(score_article(art, sents, topics, lex, gaz))
    scores.sort(key=lambda s: (s.article_id, s.sentence_index, s.topic, s.country))
    return articles, scores


def _daily_by_key(scores, articles):
    """Daily records grouped per (country, topic), both levels sorted."""
    day_of = {a.article_id: a.publish_date.isoformat() for a in articles}
    daily = aggregate_daily(scores, day_of)
    return {
        key: list(grp)
        for key, grp in groupby(daily, key=lambda d: (d.country, d.topic))
    }


def _sentiment_vintages(cfg: ExperimentConfig, country: str, grouped):
    """Monthly mean-score series per topic, wrapped as same-day vintages.

    Scores stay in their original units; scaling is the design matrix's
    job, done inside each estimation window.
    """
    out = {}
    for (c, topic), recs in sorted(grouped.items()):
        if c != country:
            continue
        monthly = resample(recs, dates.MONTHLY)
        obs = monthly.observed()
        if len(obs) < 2:
            continue
        out[topic] = indicator_to_vintages(
            topic, country, dates.MONTHLY, obs, release_for="sentiment"
        )
    return out


def _factory_for(cfg: ExperimentConfig, country: str, store, sentiments) -> DesignFactory:
    def need(sid):
        try:
            return store.get(sid, country)
        except KeyError:
            raise CliError(f"series {sid!r} for {country} not in {cfg.vintages}") from None

    if not sentiments:
        raise CliError(f"no sentiment indicators derivable for {country}")
    return DesignFactory(
        country=country,
        gdp=need(cfg.gdp_series),
        macro=[(need(sid), kind) for sid, kind in cfg.macro_series],
        surveys=[need(sid) for sid in cfg.survey_series],
        sentiments=sentiments,
        gdp_transform=cfg.gdp_transform,
        min_rows=cfg.min_rows,
    )


def _targets_for(factory: DesignFactory, cfg: ExperimentConfig) -> list[TargetRelease]:
    out = []
    for q in dates.quarter_range(cfg.oos_start, cfg.oos_end):
        release = factory.release_date_of(q)
        flash = factory.y_value(q, release)
        out.append(
            TargetRelease(
                country=factory.country,
                quarter=q,
                release_date=release,
                value=flash[0] if flash else math.nan,
            )
        )
    return out


def _outdir(cfg: ExperimentConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def _write_diagnostics(path: Path, log: DiagnosticLog, note: str) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        for rec in log:
            fh.write(f"{rec}\n")


def _emit_log(log: DiagnosticLog, verbose: bool, start: int = 0) -> None:
    if verbose:
        for rec in log.records[start:]:
            print(f"[diag] {rec}", file=sys.stderr)


# -- evaluation of a forecast panel -------------------------------------------


def _sentiment_label(model: str) -> str:
    return model.split(":", 1)[1] if model.startswith("ARXS:") else model


def _evaluate_records(cfg: ExperimentConfig, records, out: Path, log: DiagnosticLog) -> bool:
    """Write msfe/evaluation/fluctuation tables; True when cells were skipped."""
    note = metadata_header(cfg)
    partial = False
    grid = cfg.horizons
    countries = sorted({r.country for r in records})

    msfe_rows = []
    eval_rows = []
    fluct_rows = []
    for country in countries:
        recs = [r for r in records if r.country == country]
        models = sorted({r.model for r in recs if r.model != BENCHMARK})

        for model, h, ratio, n in msfe_table(recs):
            try:
                panel = loss_diff_matrix(recs, model, [h])
                steps = max(1, -(-h // 90))
                p = pa_test(panel.diffs[:, 0], h_steps=steps).p_value
            except ValueError as exc:
                log.add("evaluate", f"{country} {model} h={h}: pa test skipped: {exc}")
                partial = True
                p = math.nan
            msfe_rows.append((model, country, h, grid.subset(h), ratio, n, p))

        for model in models:
            for subset in ("nowcast", "forecast"):
                hs = [h for h in grid.horizons if grid.subset(h) == subset]
                try:
                    panel = loss_diff_matrix(recs, model, hs)
                    res = aspa_test(
                        panel.diffs,
                        seed=cfg.rng_seed(f"aspa:{country}:{model}:{subset}"),
                        subset=subset,
                    )
                except ValueError as exc:
                    log.add("evaluate", f"{country} {model} {subset}: aspa skipped: {exc}")
                    partial = True
                    continue
                eval_rows.append((country, _sentiment_label(model), subset, res.p_value))

        for model in models:
            if model == AVERAGE:
                continue
            try:
                panel = loss_diff_matrix(recs, model, [cfg.fluctuation_horizon])
                res = fluctuation_test(panel.diffs[:, 0])
            except ValueError as exc:
                log.add("evaluate", f"{country} {model}: fluctuation skipped: {exc}")
                partial = True
                continue
            for center, stat in zip(res.centers, res.stats):
                fluct_rows.append(
                    (
                        country,
                        _sentiment_label(model),
                        cfg.fluctuation_horizon,
                        center,
                        stat,
                        res.critical_value,
                    )
                )

    with (out / "msfe.csv").open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        fh.write("model,country,horizon,subset,msfe_ratio,n_obs,pa_p\n")
        for model, country, h, subset, ratio, n, p in msfe_rows:
            fh.write(
                f"{model},{country},{h},{subset},{format(ratio, '.10g')},{n},"
                f"{format(p, '.10g')}\n"
            )
    with (out / "evaluation.csv").open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        fh.write("country,sentiment,subset,p_value\n")
        for country, sentiment, subset, p in eval_rows:
            fh.write(f"{country},{sentiment},{subset},{format(p, '.10g')}\n")
    with (out / "fluctuation.csv").open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        fh.write("country,sentiment,horizon,center,stat,critical_value\n")
        for country, sentiment, h, center, stat, crit in fluct_rows:
            fh.write(
                f"{country},{sentiment},{h},{format(center, '.10g')},"
                f"{format(stat, '.10g')},{format(crit, '.10g')}\n"
            )
    return partial


# -- subcommands --------------------------------------------------------------


def cmd_ingest(cfg: ExperimentConfig, args) -> int:
    log = DiagnosticLog()
    lex, topics, gaz = _resources(cfg)  # validate before writing
    articles = _load_articles(cfg, log)
    out = _outdir(cfg)
    note = metadata_header(cfg)

    def sentences():
        for art in articles:
            for i, text in iter_article_sentences(art, cfg.score_titles):
                yield shallow_parse(text, art.article_id, i)

    n_sent = write_parsed(out / "parses.conllu", sentences(), header=note)
    _write_diagnostics(out / "ingest_diagnostics.txt", log, note)
    _emit_log(log, args.verbose)
    print(f"articles={len(articles)} sentences={n_sent} diagnostics={len(log)}")
    print(f"wrote {out / 'parses.conllu'}")
    return EXIT_OK


def cmd_sentiment(cfg: ExperimentConfig, args) -> int:
    log = DiagnosticLog()
    _, scores = _score_corpus(cfg, log)
    out = _outdir(cfg)
    note = metadata_header(cfg)
    with (out / "scores.csv").open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        fh.write("article_id,sentence_index,topic,country,score,n_terms\n")
        for s in scores:
            fh.write(
                f"{s.article_id},{s.sentence_index},{s.topic},{s.country},"
                f"{format(s.score, '.10g')},{s.n_terms}\n"
            )
    _write_diagnostics(out / "sentiment_diagnostics.txt", log, note)
    _emit_log(log, args.verbose)
    counts: dict[tuple[str, str], int] = {}
    for s in scores:
        counts[(s.country, s.topic)] = counts.get((s.country, s.topic), 0) + 1
    for (country, topic), n in sorted(counts.items()):
        print(f"{country} {topic}: {n} scored sentences")
    print(f"wrote {out / 'scores.csv'} ({len(scores)} rows)")
    return EXIT_OK


def cmd_indicators(cfg: ExperimentConfig, args) -> int:
    log = DiagnosticLog()
    articles, scores = _score_corpus(cfg, log)
    calendar = load_regimes(cfg.regimes) if cfg.regimes else None
    grouped = _daily_by_key(scores, articles)
    out = _outdir(cfg)
    note = metadata_header(cfg)

    with (out / "indicators_daily.csv").open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        fh.write("country,name,frequency,period,value\n")
        for (country, topic), recs in sorted(grouped.items()):
            for d in recs:
                fh.write(
                    f"{country},{topic},daily,{d.date},{format(d.mean_score, '.10g')}\n"
                )

    monthly = []
    quarterly = []
    for key, recs in sorted(grouped.items()):
        for freq, bucket in ((dates.MONTHLY, monthly), (dates.QUARTERLY, quarterly)):
            series = resample(recs, freq)
            try:
                bucket.append(standardize(series))
            except ValueError as exc:
                log.add("indicators", f"{key} {freq}: left unstandardized: {exc}")
                bucket.append(series)
    write_indicator_csv(out / "indicators_monthly.csv", monthly, header_note=note)
    write_indicator_csv(out / "indicators_quarterly.csv", quarterly, header_note=note)

    keys, corr = cross_correlations(monthly, log)
    with (out / "correlations.csv").open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        fh.write("country_a,name_a,country_b,name_b,correlation\n")
        for i, (ca, na) in enumerate(keys):
            for j, (cb, nb) in enumerate(keys):
                if j <= i or math.isnan(corr[i, j]):
                    continue
                fh.write(f"{ca},{na},{cb},{nb},{format(corr[i, j], '.10g')}\n")

    if calendar is not None:
        with (out / "densities.csv").open("w", encoding="utf-8") as fh:
            fh.write(f"# {note}\n")
            fh.write("country,name,regime,value,density\n")
            for series in monthly:
                for label, (grid_x, dens) in sorted(
                    regime_density(series, calendar, log).items()
                ):
                    for x, d in zip(grid_x, dens):
                        fh.write(
                            f"{series.country},{series.name},{label},"
                            f"{format(x, '.10g')},{format(d, '.10g')}\n"
                        )

    _write_diagnostics(out / "indicators_diagnostics.txt", log, note)
    _emit_log(log, args.verbose)
    print(
        f"indicators: {len(monthly)} series, daily/monthly/quarterly written to {out}"
    )
    return EXIT_OK


def cmd_vintages(cfg: ExperimentConfig, args) -> int:
    store = load_vintages(cfg.vintages)
    problems = store.validate()
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_FATAL
    out = _outdir(cfg)
    write_vintages(out / "vintages_normalized.csv", store, header_note=metadata_header(cfg))
    print(f"{len(store.series)} series validated; wrote {out / 'vintages_normalized.csv'}")
    return EXIT_OK


def cmd_forecast(cfg: ExperimentConfig, args) -> int:
    log = DiagnosticLog()
    store = load_vintages(cfg.vintages)
    problems = store.validate()
    if problems:
        more = f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""
        raise CliError(f"{cfg.vintages}: {problems[0]}{more}")
    articles, scores = _score_corpus(cfg, log)
    grouped = _daily_by_key(scores, articles)

    partial = False
    all_records = []
    eta_records = []
    audit_checked = 0
    for country in cfg.countries:
        sentiments = _sentiment_vintages(cfg, country, grouped)
        factory = _factory_for(cfg, country, store, sentiments)
        targets = _targets_for(factory, cfg)
        result = run_oos(
            factory,
            targets,
            cfg.horizons,
            cfg.est_start,
            audit=True,
            jobs=args.jobs,
            realized_vintage=cfg.realized_vintage,
        )
        if result.audit_violations:
            for v in result.audit_violations[:10]:
                print(f"audit violation: {v}", file=sys.stderr)
            raise CliError(
                f"{country}: {len(result.audit_violations)} look-ahead violations"
            )
        audit_checked += result.audit_checked
        log.records.extend(result.log.records)
        if len(result.log):
            partial = True
        all_records.extend(result.records)

        end_target = targets[-1]
        etas, eta_log = in_sample_eta(
            factory, end_target, cfg.horizons, cfg.est_start, q=cfg.fdr_q
        )
        log.records.extend(eta_log.records)
        if len(eta_log):
            partial = True
        eta_records.extend(etas)

    if not all_records:
        raise CliError("no forecasts produced; see diagnostics")

    out = _outdir(cfg)
    note = metadata_header(cfg)
    write_forecast_csv(out / "forecasts.csv", all_records, header_note=note)
    with (out / "insample.csv").open("w", encoding="utf-8") as fh:
        fh.write(f"# {note}\n")
        fh.write("country,indicator,horizon,eta_hat,std_err,p_raw,p_adjusted\n")
        for e in eta_records:
            fh.write(
                f"{e.country},{e.indicator},{e.horizon},{format(e.eta_hat, '.10g')},"
                f"{format(e.std_err, '.10g')},{format(e.p_raw, '.10g')},"
                f"{format(e.p_adjusted, '.10g')}\n"
            )
    partial |= _evaluate_records(cfg, all_records, out, log)
    _write_diagnostics(out / "forecast_diagnostics.txt", log, note)
    _emit_log(log, args.verbose)
    print(
        f"forecasts={len(all_records)} audit_cells={audit_checked} "
        f"eta_rows={len(eta_records)} diagnostics={len(log)}"
    )
    print(f"wrote {out / 'forecasts.csv'}")
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_evaluate(cfg: ExperimentConfig, args) -> int:
    out = _outdir(cfg)
    src = out / "forecasts.csv"
    if not src.is_file():
        raise CliError(f"{src} not found; run the forecast command first")
    records = read_forecast_csv(src)
    if not records:
        raise CliError(f"{src}: no forecast rows")
    log = DiagnosticLog()
    partial = _evaluate_records(cfg, records, out, log)
    _write_diagnostics(out / "evaluate_diagnostics.txt", log, metadata_header(cfg))
    _emit_log(log, args.verbose)
    print(f"evaluated {len(records)} forecasts from {src}")
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_synth(args) -> int:
    if args.seed is None:
        raise CliError("synth needs --seed for a reproducible fixture")
    paths = generate_fixture(
        args.out, seed=args.seed, lead_quarters=args.lead, snr=args.snr
    )
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return EXIT_OK


def cmd_report(cfg: ExperimentConfig, args) -> int:
    out = _outdir(cfg)
    src = out / "forecasts.csv"
    if not src.is_file():
        raise CliError(f"{src} not found; run the forecast command first")
    records = read_forecast_csv(src)
    lines = [f"<!-- {metadata_header(cfg)} -->", "", "# Forecast run summary", ""]
    models = sorted({r.model for r in records})
    origins = sorted({r.target for r in records})
    horizons = sorted({r.horizon for r in records})
    lines += [
        f"- {len(records)} forecasts, {len(models)} models, "
        f"{len(origins)} target quarters, horizons {horizons[0]}..{horizons[-1]} days",
        f"- models: {', '.join(models)}",
        "",
    ]

    grid = cfg.horizons
    ratios = msfe_table(records)
    if ratios:
        lines += ["## MSFE vs benchmark (mean ratio by subset)", ""]
        lines += ["| model | nowcast | forecast |", "| --- | --- | --- |"]
        by_model: dict[str, dict[str, list[float]]] = {}
        for model, h, ratio, _n in ratios:
            by_model.setdefault(model, {}).setdefault(grid.subset(h), []).append(ratio)
        for model in sorted(by_model):
            cells = []
            for subset in ("nowcast", "forecast"):
                vals = by_model[model].get(subset)
                cells.append(f"{sum(vals) / len(vals):.4f}" if vals else "-")
            lines.append(f"| {model} | {cells[0]} | {cells[1]} |")
        lines.append("")

    eval_csv = out / "evaluation.csv"
    if eval_csv.is_file():
        rows = [
            line.split(",")
            for line in eval_csv.read_text().splitlines()
            if line and not line.startswith(("#", "country,"))
        ]
        if rows:
            lines += ["## Superior predictive ability (aSPA p-values)", ""]
            lines += ["| country | sentiment | subset | p |", "| --- | --- | --- | --- |"]
            for country, sentiment, subset, p in rows:
                lines.append(f"| {country} | {sentiment} | {subset} | {float(p):.4f} |")
            lines.append("")

    ins_csv = out / "insample.csv"
    if ins_csv.is_file():
        rows = [
            line.split(",")
            for line in ins_csv.read_text().splitlines()
            if line and not line.startswith(("#", "country,"))
        ]
        if rows:
            best: dict[tuple[str, str], float] = {}
            for country, indicator, _h, _eta, _se, _praw, padj in rows:
                key = (country, indicator)
                p = float(padj)
                if key not in best or p < best[key]:
                    best[key] = p
            lines += ["## In-sample incremental information (min adjusted p)", ""]
            lines += ["| country | indicator | min p_adj |", "| --- | --- | --- |"]
            for (country, indicator), p in sorted(best.items()):
                lines.append(f"| {country} | {indicator} | {p:.4f} |")
            lines.append("")

    (out / "report.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out / 'report.md'}")
    return EXIT_OK


# -- argument wiring ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="experiment YAML")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers")
    common.add_argument("--verbose", "-v", action="store_true", help="echo diagnostics")

    parser = argparse.ArgumentParser(
        prog="newsnowcast",
        description="news sentiment indicators and real-time GDP forecast evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, text in (
        ("ingest", cmd_ingest, "parse the corpus into a dependency file"),
        ("sentiment", cmd_sentiment, "score aspect sentiment per sentence"),
        ("indicators", cmd_indicators, "aggregate scores into indicator series"),
        ("vintages", cmd_vintages, "validate and normalize the vintage file"),
        ("forecast", cmd_forecast, "run the real-time forecast experiment"),
        ("evaluate", cmd_evaluate, "recompute evaluation tables from stored forecasts"),
        ("report", cmd_report, "summarize a finished run as markdown"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(fn=fn, needs_config=True)

    p = sub.add_parser(
        "synth", parents=[common], help="generate a synthetic end-to-end fixture"
    )
    p.add_argument("--out", required=True, help="fixture directory")
    p.add_argument("--lead", type=int, default=2, help="quarters the signal leads GDP")
    p.add_argument("--snr", type=float, default=2.0, help="signal variance ratio")
    p.set_defaults(fn=None, needs_config=False)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if not args.needs_config:
            return cmd_synth(args)
        if not args.config:
            raise CliError(f"{args.command} needs --config")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        return args.fn(cfg, args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
