import datetime as dt
import math

from newsnowcast.corpus import RawArticle
from newsnowcast.gazetteer import default_gazetteer
from newsnowcast.lexicon import Lexicon, default_lexicon
from newsnowcast.parsing import Token, shallow_parse
from newsnowcast.scoring import (
    extract_dependents,
    match_topics,
    resolve_location,
    score_article,
    score_chunk,
    term_scores,
)
from newsnowcast.topics import TopicSpec, default_topics

LEX = default_lexicon()
TOPICS = default_topics()
GAZ = default_gazetteer()


def _tok(i, lemma, pos, head, dep, surface=None):
    return Token(index=i, surface=surface or lemma, lemma=lemma, pos=pos,
                 head_index=head, dep_relation=dep)


def _article(country="ES"):
    return RawArticle(
        article_id="x", outlet="o", outlet_country=country,
        publish_date=dt.date(2005, 1, 1), title="t", body="b", language="en",
    )


def test_match_topics_longest_phrase_wins():
    spec = TopicSpec(
        name="t",
        single_terms=frozenset({("interest", "rate"), ("rate",)}),
        cross_products=(),
    )
    s = shallow_parse("Interest rates rose.", "a", 0)
    hits = match_topics(s, [spec])
    assert [(m.start, m.end) for m in hits] == [(1, 2)]


def test_extract_dependents_climbs_to_verb():
    # rates(2) <-nsubj- rise(3), sharply(4) advmod of rise
    toks = (
        _tok(1, "interest", "NOUN", 2, "compound"),
        _tok(2, "rate", "NOUN", 3, "nsubj"),
        _tok(3, "rise", "VERB", 0, "root"),
        _tok(4, "sharply", "ADV", 3, "advmod"),
    )
    from newsnowcast.parsing import Sentence
    from newsnowcast.scoring import TopicMention

    sent = Sentence(article_id="a", sentence_index=0, tokens=toks)
    spec = TopicSpec("t", frozenset({("interest", "rate")}), ())
    chunk = extract_dependents(sent, TopicMention(topic=spec, start=1, end=2))
    assert [t.lemma for t in chunk] == ["rise", "sharply"]


def test_extract_dependents_gives_up_past_two_hops():
    # mention -> noun -> noun -> noun -> verb: verb is three hops up
    toks = (
        _tok(1, "cost", "NOUN", 2, "nmod"),
        _tok(2, "share", "NOUN", 3, "nmod"),
        _tok(3, "total", "NOUN", 4, "nsubj"),
        _tok(4, "rise", "VERB", 0, "root"),
    )
    from newsnowcast.parsing import Sentence
    from newsnowcast.scoring import TopicMention

    sent = Sentence(article_id="a", sentence_index=0, tokens=toks)
    spec = TopicSpec("t", frozenset({("cost",)}), ())
    assert extract_dependents(sent, TopicMention(topic=spec, start=1, end=1)) == ()


def test_term_scores_intensifiers_stack_on_their_head():
    lex = Lexicon(
        entries={"improve": 0.6, "plain": 0.2},
        intensifiers={"very": 1.5, "extremely": 2.0},
    )
    chunk = [
        _tok(1, "improve", "VERB", 0, "root"),
        _tok(2, "very", "ADV", 1, "advmod"),
        _tok(3, "extremely", "ADV", 1, "advmod"),
        _tok(4, "plain", "ADJ", 1, "amod"),
        _tok(5, "very", "ADV", 9, "advmod"),  # head not in the chunk: inert
    ]
    assert term_scores(chunk, lex) == [0.6 * 1.5 * 2.0, 0.2]


def test_score_chunk_arithmetic():
    lex = Lexicon(entries={"good": 0.8, "bad": -0.2}, negators=frozenset({"not"}))
    plus = TopicSpec("p", frozenset({("x",)}), (), 1)
    minus = TopicSpec("m", frozenset({("x",)}), (), -1)
    chunk = [_tok(1, "good", "ADJ", 0, "root"), _tok(2, "bad", "ADJ", 1, "amod")]
    mean = (0.8 - 0.2) / 2
    assert score_chunk(chunk, plus, lex) == mean
    assert score_chunk(chunk, minus, lex) == -mean

    negated = chunk + [_tok(3, "not", "PART", 1, "neg")]
    assert score_chunk(negated, plus, lex) == -mean
    double = negated + [_tok(4, "not", "PART", 2, "neg")]
    assert score_chunk(double, plus, lex) == mean

    assert score_chunk([_tok(1, "nothing", "NOUN", 0, "root")], plus, lex) == 0.0


def test_score_chunk_clips_to_unit_interval():
    lex = Lexicon(entries={"collapse": -0.85}, intensifiers={"utterly": 2.0})
    spec = TopicSpec("t", frozenset({("x",)}), ())
    chunk = [_tok(1, "collapse", "VERB", 0, "root"),
             _tok(2, "utterly", "ADV", 1, "advmod")]
    assert score_chunk(chunk, spec, lex) == -1.0


def test_pipeline_scores_frozen():
    """End-to-end scores for a handful of sentences, checked once by hand
    against the dictionary and the chunk rules."""
    expect = {
        "The German economy is growing strongly.": ("economy", "DE", 0.6),
        "The economy is growing.": ("economy", "ES", 0.6),
        "Unemployment is not falling.": ("unemployment", "ES", -0.5),
        "The economy did not grow.": ("economy", "ES", -0.6),
    }
    art = _article("ES")
    for text, (topic, country, score) in expect.items():
        parses = [shallow_parse(text, art.article_id, 0)]
        out = score_article(art, parses, TOPICS, LEX, GAZ)
        assert len(out) == 1, text
        got = out[0]
        assert (got.topic, got.country) == (topic, country), text
        assert math.isclose(got.score, score), text


def test_score_article_drops_unscored_mentions():
    art = _article()
    parses = [shallow_parse("The economy is large.", art.article_id, 0)]
    assert score_article(art, parses, TOPICS, LEX, GAZ) == []
    kept = score_article(art, parses, TOPICS, LEX, GAZ, keep_zero=True)
    assert len(kept) == 1 and kept[0].score == 0.0 and kept[0].n_terms == 0


def test_resolve_location_prefers_gazetteer_hit():
    art = _article("ES")
    s = shallow_parse("The French economy is growing.", art.article_id, 0)
    m = match_topics(s, TOPICS)[0]
    assert resolve_location(s, art, GAZ, m) == "FR"
