import datetime as dt
import json

import pytest

from newsnowcast.corpus import (
    RawArticle,
    article_text,
    ingest_corpus,
    iter_article_sentences,
    segment_sentences,
)
from newsnowcast.diagnostics import DiagnosticLog


def _record(**over):
    base = {
        "id": "a1", "outlet": "Wire", "country": "DE", "date": "2005-03-01",
        "title": "Growth returns", "body": "The economy grew.", "language": "en",
    }
    base.update(over)
    return base


def _write_corpus(path, records):
    with path.open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r if isinstance(r, str) else json.dumps(r))
            fh.write("\n")


def test_segmentation_keeps_abbreviations_and_decimals():
    assert segment_sentences("Growth rose. Mr. Smith said so! Really?") == [
        "Growth rose.", "Mr. Smith said so!", "Really?",
    ]
    assert segment_sentences("Output grew 3.5 percent. Then it fell.") == [
        "Output grew 3.5 percent.", "Then it fell.",
    ]


def test_segmentation_handles_quotes_and_blank_text():
    assert segment_sentences('He said "stop." Then left.') == [
        'He said "stop."', "Then left.",
    ]
    assert segment_sentences("   ") == []


def test_ingest_yields_valid_records_in_file_order(tmp_path):
    p = tmp_path / "corpus.jsonl"
    _write_corpus(p, [_record(), _record(id="a2", title="Second")])
    log = DiagnosticLog()
    arts = list(ingest_corpus(p, log))
    assert [a.article_id for a in arts] == ["a1", "a2"]
    assert arts[0].outlet_country == "DE"
    assert arts[0].publish_date.isoformat() == "2005-03-01"
    assert len(log) == 0


def test_ingest_logs_bad_records_and_continues(tmp_path):
    p = tmp_path / "corpus.jsonl"
    _write_corpus(p, [
        "{not json",
        _record(country="Germany"),
        _record(id="a3", date="2005-13-01"),
        {"id": "a4", "outlet": "Wire"},
        _record(id="a5", body="  "),
        _record(id="a6"),
        _record(id="a6", title="dup id"),
    ])
    log = DiagnosticLog()
    arts = list(ingest_corpus(p, log))
    assert [a.article_id for a in arts] == ["a6"]
    assert len(log) == 6
    lines = [d.line for d in log]
    assert lines == [1, 2, 3, 4, 5, 7]


def test_ingest_missing_file_raises(tmp_path):
    with pytest.raises(OSError):
        list(ingest_corpus(tmp_path / "nope.jsonl"))


def test_article_text_and_sentence_indexing():
    art = RawArticle(
        article_id="a1", outlet="Wire", outlet_country="FR",
        publish_date=dt.date(2005, 3, 1),
        title="Growth returns", body="Output rose. Prices fell.", language="en",
    )
    assert article_text(art).startswith("Growth returns")
    assert article_text(art, include_title=False) == "Output rose. Prices fell."
    pairs = list(iter_article_sentences(art))
    assert [i for i, _s in pairs] == [0, 1, 2]
    assert pairs[1] == (1, "Output rose.")
