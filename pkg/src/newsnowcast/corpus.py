"""Corpus ingestion: JSONL article records and sentence segmentation.

The corpus format is one JSON object per line with keys exactly
``id, outlet, country, date, title, body, language``. Invalid lines are
reported through a DiagnosticLog and skipped; valid ones are streamed in
file order. The first record wins on duplicate ids so a re-ordered copy
of the same file yields the same article set.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .diagnostics import DiagnosticLog

_REQUIRED_KEYS = ("id", "outlet", "country", "date", "title", "body", "language")
_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")
_MIN_DATE = dt.date(1900, 1, 1)


@dataclass(frozen=True)
class RawArticle:
    article_id: str
    outlet: str
    outlet_country: str
    publish_date: dt.date
    title: str
    body: str
    language: str


def _validate_record(obj: dict) -> RawArticle:
    missing = [k for k in _REQUIRED_KEYS if k not in obj]
    if missing:
        raise ValueError(f"missing keys: {', '.join(missing)}")
    country = str(obj["country"]).upper()
    if not _COUNTRY_RE.match(country):
        raise ValueError(f"country {obj['country']!r} is not a 2-letter code")
    date = dt.date.fromisoformat(str(obj["date"]))
    if not (_MIN_DATE <= date <= dt.date.today()):
        raise ValueError(f"publish date {date} outside [1900-01-01, today]")
    body = str(obj["body"])
    if not body.strip():
        raise ValueError("empty body")
    article_id = str(obj["id"])
    if not article_id:
        raise ValueError("empty id")
    return RawArticle(
        article_id=article_id,
        outlet=str(obj["outlet"]),
        outlet_country=country,
        publish_date=date,
        title=str(obj["title"]),
        body=body,
        language=str(obj["language"]),
    )


def ingest_corpus(path: str | Path, log: DiagnosticLog | None = None) -> Iterator[RawArticle]:
    """Stream articles from a JSONL corpus file.

    Malformed lines and duplicate ids produce diagnostics with line
    numbers; processing continues. An unreadable file raises.
    """
    log = log if log is not None else DiagnosticLog()
    path = Path(path)
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("record is not a JSON object")
                article = _validate_record(obj)
            except (ValueError, json.JSONDecodeError) as exc:
                log.add(str(path), f"malformed record: {exc}", line=lineno)
                continue
            if article.article_id in seen:
                log.add(str(path), f"duplicate article_id {article.article_id!r}, record skipped", line=lineno)
                continue
            seen.add(article.article_id)
            yield article


def _load_abbreviations() -> frozenset[str]:
    text = resources.files("newsnowcast.data").joinpath("abbreviations.txt").read_text("utf-8")
    entries = set()
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            entries.add(line)
    return frozenset(entries)


_ABBREVIATIONS = _load_abbreviations()

_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]]*\s+")


def _is_abbreviation(word: str) -> bool:
    w = word.rstrip(".").lower()
    if not w:
        return False
    if w in _ABBREVIATIONS:
        return True
    # Single letters and dotted acronyms ("E.C.B") never end a sentence.
    if len(w) == 1 and w.isalpha():
        return True
    if "." in w and w.replace(".", "").isalpha():
        return True
    return False


def segment_sentences(text: str) -> list[str]:
    """Split text into sentences on terminal punctuation.

    Splits after ``.!?`` followed by whitespace and an upper-case letter,
    digit or opening quote, unless the preceding token is a known
    abbreviation, an initial, or a dotted acronym. The concatenation of
    the returned sentences reproduces the input up to the inter-sentence
    whitespace.
    """
    sentences: list[str] = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        nxt = text[end] if end < len(text) else ""
        if nxt and not (nxt.isupper() or nxt.isdigit() or nxt in "\"'(["):
            continue
        before = text[start : m.start() + 1].rstrip()
        last_word = before.split()[-1] if before.split() else ""
        if _is_abbreviation(last_word):
            continue
        piece = text[start:end].strip()
        if piece:
            sentences.append(piece)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def article_text(article: RawArticle, include_title: bool = True) -> str:
    """Text to score: title and body, or body alone."""
    title = article.title.strip()
    if include_title and title:
        if title[-1] not in ".!?":
            title += "."
        return f"{title} {article.body}"
    return article.body


def iter_article_sentences(
    article: RawArticle, include_title: bool = True
) -> Iterable[tuple[int, str]]:
    for i, s in enumerate(segment_sentences(article_text(article, include_title))):
        yield i, s
