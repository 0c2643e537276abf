"""Experiment configuration: one YAML file drives every subcommand.

Relative paths resolve against the config file's directory. Loading
validates everything up front so commands can fail before touching any
output file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from . import __version__, dates
from .vintages import TRANSFORMS, HorizonGrid

REALIZED_CHOICES = ("flash", "final")


@dataclass(frozen=True)
class ExperimentConfig:
    path: Path
    countries: tuple[str, ...]
    corpus: Path
    vintages: Path
    regimes: Path | None
    parses: Path | None
    lexicon: Path | None
    topics: Path | None
    gazetteer: Path | None
    output_dir: Path
    seed: int
    est_start: str
    oos_start: str
    oos_end: str
    gdp_series: str
    gdp_transform: str
    macro_series: tuple[tuple[str, str], ...]  # (series_id, transform)
    survey_series: tuple[str, ...]
    horizons: HorizonGrid
    fdr_q: float
    min_rows: int
    fluctuation_horizon: int
    realized_vintage: str
    score_titles: bool
    raw: dict

    def rng_seed(self, label: str) -> int:
        """Deterministic substream seed for one named task."""
        tag = hashlib.sha256(f"{self.seed}:{label}".encode()).digest()[:4]
        return int.from_bytes(tag, "big")


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def metadata_header(cfg: ExperimentConfig) -> str:
    return f"newsnowcast={__version__} config={config_hash(cfg.raw)} seed={cfg.seed}"


def _quarter(value, name: str, problems: list[str]) -> str | None:
    s = str(value)
    try:
        dates.quarter_index(s)
    except ValueError:
        problems.append(f"{name}: not a quarter: {value!r}")
        return None
    return s


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"config file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    base = path.parent
    problems: list[str] = []

    def take(key, default=None):
        return raw.get(key, default)

    seed = take("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        problems.append("seed: required integer")
        seed = 0

    countries = take("countries")
    if countries is None:
        one = take("country")
        countries = [one] if one else []
    if not countries:
        problems.append("countries: at least one required")
    countries = tuple(str(c).upper() for c in countries)
    for c in countries:
        if len(c) != 2 or not c.isalpha():
            problems.append(f"countries: bad code {c!r}")

    def resolve(key, required):
        value = take(key)
        if value is None:
            if required:
                problems.append(f"{key}: required path missing")
            return None
        p = (base / str(value)).resolve() if not Path(str(value)).is_absolute() else Path(str(value))
        if not p.exists():
            problems.append(f"{key}: path does not exist: {p}")
        return p

    corpus = resolve("corpus", required=True)
    vintages = resolve("vintages", required=True)
    regimes = resolve("regimes", required=False)
    parses = resolve("parses", required=False)
    lexicon = resolve("lexicon", required=False)
    topics = resolve("topics", required=False)
    gazetteer = resolve("gazetteer", required=False)

    out_value = str(take("output_dir", "out"))
    output_dir = (base / out_value).resolve() if not Path(out_value).is_absolute() else Path(out_value)

    est_start = _quarter(take("est_start", "1997Q1"), "est_start", problems)
    oos_start = _quarter(take("oos_start", "2007Q1"), "oos_start", problems)
    oos_end = _quarter(take("oos_end", "2019Q4"), "oos_end", problems)
    if est_start and oos_start and oos_end:
        if dates.quarter_index(oos_start) <= dates.quarter_index(est_start):
            problems.append(f"oos_start {oos_start} must come after est_start {est_start}")
        if dates.quarter_index(oos_end) < dates.quarter_index(oos_start):
            problems.append(f"oos_end {oos_end} before oos_start {oos_start}")
    est_start = est_start or ""
    oos_start = oos_start or ""
    oos_end = oos_end or ""

    gdp_series = str(take("gdp_series", "gdp"))
    gdp_transform = str(take("gdp_transform", "annualized_qoq_growth"))
    if gdp_transform not in TRANSFORMS:
        problems.append(f"gdp_transform: unknown transform {gdp_transform!r}")

    macro_raw = take("macro_series", {})
    if not isinstance(macro_raw, dict):
        problems.append("macro_series: mapping series_id -> transform expected")
        macro_raw = {}
    macro = []
    for sid, kind in macro_raw.items():
        if kind not in TRANSFORMS:
            problems.append(f"macro_series.{sid}: unknown transform {kind!r}")
        macro.append((str(sid), str(kind)))

    survey_raw = take("survey_series", [])
    if not isinstance(survey_raw, list):
        problems.append("survey_series: list expected")
        survey_raw = []
    surveys = tuple(str(s) for s in survey_raw)

    hz = take("horizons", {}) or {}
    try:
        grid = HorizonGrid(
            min_h=int(hz.get("min", 15)),
            max_h=int(hz.get("max", 495)),
            step=int(hz.get("step", 15)),
            nowcast_threshold=int(hz.get("nowcast_threshold", 165)),
        )
    except (TypeError, ValueError) as exc:
        problems.append(f"horizons: {exc}")
        grid = HorizonGrid()

    fdr_q = float(take("fdr_q", 0.05))
    if not 0.0 < fdr_q < 1.0:
        problems.append(f"fdr_q: must be in (0,1), got {fdr_q}")
    min_rows = int(take("min_rows", 24))
    if min_rows < 4:
        problems.append(f"min_rows: too small ({min_rows})")
    fluct_h = int(take("fluctuation_horizon", 165))
    if fluct_h not in grid.horizons:
        problems.append(f"fluctuation_horizon {fluct_h} not on the horizon grid")
    realized = str(take("realized_vintage", "flash"))
    if realized not in REALIZED_CHOICES:
        problems.append(f"realized_vintage: expected one of {REALIZED_CHOICES}")
    score_titles = bool(take("score_titles", True))

    if problems:
        raise ValueError(f"{path}: invalid config:\n  " + "\n  ".join(problems))

    return ExperimentConfig(
        path=path,
        countries=countries,
        corpus=corpus,
        vintages=vintages,
        regimes=regimes,
        parses=parses,
        lexicon=lexicon,
        topics=topics,
        gazetteer=gazetteer,
        output_dir=output_dir,
        seed=seed,
        est_start=est_start,
        oos_start=oos_start,
        oos_end=oos_end,
        gdp_series=gdp_series,
        gdp_transform=gdp_transform,
        macro_series=tuple(macro),
        survey_series=surveys,
        horizons=grid,
        fdr_q=fdr_q,
        min_rows=min_rows,
        fluctuation_horizon=fluct_h,
        realized_vintage=realized,
        score_titles=score_titles,
        raw=raw,
    )
