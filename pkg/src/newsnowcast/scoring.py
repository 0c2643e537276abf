"""Sentence-level aspect sentiment: mention detection, location resolution,
dependent-term traversal and chunk scoring.

The traversal follows a fixed rule set: from the mention's syntactic head,
climb to the governing verb (at most 2 hops up), then collect that verb's
direct objects and predicate nominals/adjectives, then pull in adjectival,
adverbial and negation modifiers of anything collected. Depth is counted
in dependency hops from the mention and capped at 3.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import RawArticle
from .gazetteer import LocationGazetteer
from .lexicon import Lexicon
from .parsing import Sentence, Token
from .topics import TopicSpec

MAX_DEPTH = 3

_NOUNISH = ("NOUN", "PROPN", "PRON")
_VERBISH = ("VERB", "AUX")


@dataclass(frozen=True)
class TopicMention:
    topic: TopicSpec
    start: int  # 1-based token index, inclusive
    end: int

    def span(self) -> range:
        return range(self.start, self.end + 1)


@dataclass(frozen=True)
class SentenceScore:
    article_id: str
    sentence_index: int
    topic: str
    country: str
    score: float
    n_terms: int

    def __post_init__(self):
        if not -1.0 <= self.score <= 1.0:
            raise ValueError(f"score outside [-1, 1]: {self.score}")
        if self.n_terms < 0:
            raise ValueError("n_terms must be >= 0")


# -- mention detection --------------------------------------------------------


def _phrase_spans(lemmas: Sequence[str], phrase: tuple[str, ...]) -> list[tuple[int, int]]:
    k = len(phrase)
    out = []
    for i in range(len(lemmas) - k + 1):
        if tuple(lemmas[i : i + k]) == phrase:
            out.append((i + 1, i + k))
    return out


def _linked(a: Token, b: Token) -> bool:
    return abs(a.index - b.index) == 1 or a.head_index == b.index or b.head_index == a.index


def _dedup_overlaps(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    # longest span wins; among equals, the leftmost
    kept: list[tuple[int, int]] = []
    for s in sorted(set(spans), key=lambda x: (-(x[1] - x[0]), x[0])):
        if all(s[1] < k[0] or s[0] > k[1] for k in kept):
            kept.append(s)
    return sorted(kept)


def match_topics(sentence: Sentence, topics: Iterable[TopicSpec]) -> list[TopicMention]:
    """Find topic keyword mentions as token spans.

    Phrases match on contiguous lemma sequences; cross products match a
    modifier-set lemma and head-set lemma that are adjacent or directly
    linked in the tree. Overlapping spans of the same topic keep only
    the longest.
    """
    lemmas = [t.lemma for t in sentence.tokens]
    mentions: list[TopicMention] = []
    for topic in sorted(topics, key=lambda t: t.name):
        spans: list[tuple[int, int]] = []
        for phrase in topic.single_terms:
            spans.extend(_phrase_spans(lemmas, phrase))
        for mods, heads in topic.cross_products:
            for i, a in enumerate(sentence.tokens):
                if a.lemma not in mods:
                    continue
                for b in sentence.tokens:
                    if b.lemma in heads and b.index != a.index and _linked(a, b):
                        spans.append((min(a.index, b.index), max(a.index, b.index)))
        for start, end in _dedup_overlaps(spans):
            mentions.append(TopicMention(topic=topic, start=start, end=end))
    return sorted(mentions, key=lambda m: (m.start, m.end, m.topic.name))


# -- location resolution ------------------------------------------------------


def _adjacency(sentence: Sentence) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {t.index: [] for t in sentence.tokens}
    for t in sentence.tokens:
        if t.head_index != 0:
            adj[t.index].append(t.head_index)
            adj[t.head_index].append(t.index)
    return adj

def _hop_distances(sentence: Sentence, origin: int) -> dict[int, int]:
    adj = _adjacency(sentence)
    dist = {origin: 0}
    queue = deque([origin])
    while queue:
        cur = queue.popleft()
        for nb in sorted(adj[cur]):
            if nb not in dist:
                dist[nb] = dist[cur] + 1
                queue.append(nb)
    return dist


def mention_head(sentence: Sentence, mention: TopicMention) -> Token:
    """The span token whose head lies outside the span (last one if several)."""
    inside = set(mention.span())
    head = None
    for i in mention.span():
        tok = sentence.tokens[i - 1]
        if tok.head_index not in inside:
            head = tok
    return head if head is not None else sentence.tokens[mention.end - 1]


def gazetteer_hits(sentence: Sentence, gaz: LocationGazetteer) -> list[tuple[int, int, str]]:
    lemmas = [t.lemma for t in sentence.tokens]
    raw: list[tuple[int, int, str]] = []
    for k in range(gaz.max_len, 0, -1):
        for i in range(len(lemmas) - k + 1):
            code = gaz.lookup(tuple(lemmas[i : i + k]))
            if code is not None:
                raw.append((i + 1, i + k, code))
    by_span = {(s, e): c for s, e, c in reversed(raw)}
    kept = _dedup_overlaps([(s, e) for s, e, _ in raw])
    return [(s, e, by_span[(s, e)]) for s, e in kept]


def resolve_location(
    sentence: Sentence,
    article: RawArticle,
    gaz: LocationGazetteer,
    mention: TopicMention | None = None,
) -> str:
    """Country of the gazetteer hit nearest to the mention in dependency
    hops; leftmost wins ties; outlet country when the sentence has no hit."""
    hits = gazetteer_hits(sentence, gaz)
    if not hits:
        return article.outlet_country
    if mention is None:
        return hits[0][2]
    dist = _hop_distances(sentence, mention_head(sentence, mention).index)
    inf = len(sentence.tokens) + 1

    def hit_key(hit):
        s, e, _ = hit
        return (min(dist.get(i, inf) for i in range(s, e + 1)), s)

    return min(hits, key=hit_key)[2]


# -- dependent-term traversal -------------------------------------------------


def _is_neg(tok: Token) -> bool:
    return tok.dep_relation == "neg" or (tok.dep_relation == "advmod" and tok.pos == "PART")


def extract_dependents(sentence: Sentence, mention: TopicMention) -> tuple[Token, ...]:
    """Collect the chunk of terms grammatically tied to the mention."""
    tokens = sentence.tokens
    inside = set(mention.span())
    head = mention_head(sentence, mention)

    # climb to the governing verb; the mention head may itself be the verb
    verb = None
    verb_depth = 0
    if head.pos in _VERBISH:
        verb = head
    else:
        cur, hops = head, 0
        while cur.head_index != 0 and hops < MAX_DEPTH - 1:
            parent = tokens[cur.head_index - 1]
            hops += 1
            if parent.pos in _VERBISH:
                verb, verb_depth = parent, hops
                break
            cur = parent
    if verb is None:
        return ()

    children: dict[int, list[Token]] = {}
    for t in tokens:
        children.setdefault(t.head_index, []).append(t)

    collected: dict[int, int] = {}  # token index -> depth
    if verb.index not in inside:
        collected[verb.index] = verb_depth

    # the verb's objects and predicate complements
    if verb_depth + 1 <= MAX_DEPTH:
        for c in children.get(verb.index, ()):
            if c.index in inside or c.index in collected:
                continue
            rel = "dobj" if c.dep_relation == "obj" else c.dep_relation
            if rel == "dobj" and c.pos in _NOUNISH:
                collected[c.index] = verb_depth + 1
            elif rel == "dep" and c.pos in ("ADJ", "NOUN", "PROPN"):
                collected[c.index] = verb_depth + 1

    # modifiers and negators of anything collected, transitively
    frontier = sorted(collected) + ([verb.index] if verb.index in inside else [])
    while frontier:
        nxt: list[int] = []
        for idx in frontier:
            depth = collected.get(idx, verb_depth)
            if depth + 1 > MAX_DEPTH:
                continue
            for c in children.get(idx, ()):
                if c.index in inside or c.index in collected:
                    continue
                if c.dep_relation in ("amod", "advmod") or _is_neg(c):
                    collected[c.index] = depth + 1
                    nxt.append(c.index)
        frontier = nxt

    return tuple(tokens[i - 1] for i in sorted(collected))


# -- chunk scoring ------------------------------------------------------------


def term_scores(chunk: Sequence[Token], lexicon: Lexicon) -> list[float]:
    """Per-token scores for chunk members found in the dictionary, with
    intensifier children applied multiplicatively to their heads."""
    in_chunk = {t.index for t in chunk}
    mults: dict[int, float] = {}
    for t in chunk:
        m = lexicon.multiplier(t.lemma)
        if m is not None and t.head_index in in_chunk:
            mults[t.head_index] = mults.get(t.head_index, 1.0) * m
    out = []
    for t in sorted(chunk, key=lambda t: t.index):
        s = lexicon.score(t.lemma)
        if s is not None:
            out.append(s * mults.get(t.index, 1.0))
    return out


def score_chunk(chunk: Sequence[Token], topic: TopicSpec, lexicon: Lexicon) -> float:
    """Mean dictionary score of the chunk, negation-flipped when the chunk
    holds an odd number of negators, sign-adjusted by the keyword tone,
    clipped to [-1, 1]. Zero when nothing in the chunk is scored."""
    scores = term_scores(chunk, lexicon)
    if not scores:
        return 0.0
    base = math.fsum(scores) / len(scores)
    n_neg = sum(1 for t in chunk if lexicon.is_negator(t.lemma))
    if n_neg % 2 == 1:
        base = -base
    base *= topic.keyword_tone
    return max(-1.0, min(1.0, base))


def score_article(
    article: RawArticle,
    parses: Iterable[Sentence],
    topics: Iterable[TopicSpec],
    lexicon: Lexicon,
    gaz: LocationGazetteer,
    keep_zero: bool = False,
) -> list[SentenceScore]:
    """Score every topic mention in the article's parsed sentences.

    Emits one record per (sentence, mention); mentions whose chunk has no
    dictionary term are dropped unless keep_zero is set.
    """
    topics = list(topics)
    out: list[SentenceScore] = []
    for sentence in parses:
        for mention in match_topics(sentence, topics):
            chunk = extract_dependents(sentence, mention)
            n_terms = len(term_scores(chunk, lexicon))
            if n_terms == 0 and not keep_zero:
                continue
            out.append(
                SentenceScore(
                    article_id=article.article_id,
                    sentence_index=sentence.sentence_index,
                    topic=mention.topic.name,
                    country=resolve_location(sentence, article, gaz, mention),
                    score=score_chunk(chunk, mention.topic, lexicon),
                    n_terms=n_terms,
                )
            )
    return out
