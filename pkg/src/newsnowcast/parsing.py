"""Dependency-annotated sentences: external parse files and a built-in fallback.

Two ways to get a parsed ``Sentence``: read a pre-parsed corpus in the
columnar (CoNLL-U compatible) format via :func:`load_parsed`, or run the
deterministic :func:`shallow_parse` heuristic, which tags tokens with
suffix/closed-class rules and assigns projective heads. The shallow parser
exists so the whole scoring pipeline runs self-contained; it is not a
statistical parser and does not try to be one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .diagnostics import DiagnosticLog

# -- token and sentence types -------------------------------------------------


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position
    surface: str
    lemma: str
    pos: str  # coarse universal tag
    head_index: int  # 0 for root
    dep_relation: str


@dataclass(frozen=True)
class Sentence:
    article_id: str
    sentence_index: int
    tokens: tuple[Token, ...]

    def __post_init__(self):
        err = validate_tokens(self.tokens)
        if err:
            raise ValueError(err)


def validate_tokens(tokens: tuple[Token, ...] | list[Token]) -> str | None:
    """Check index contiguity, single root, no self-heads, acyclicity."""
    n = len(tokens)
    if n == 0:
        return "sentence has no tokens"
    for i, tok in enumerate(tokens, start=1):
        if tok.index != i:
            return f"token indices not contiguous at position {i}"
        if tok.head_index == tok.index:
            return f"token {i} is its own head"
        if not (0 <= tok.head_index <= n):
            return f"token {i} head {tok.head_index} out of range"
    roots = [t.index for t in tokens if t.head_index == 0]
    if len(roots) != 1:
        return f"expected exactly one root, found {len(roots)}"
    for tok in tokens:
        seen = set()
        cur = tok.index
        while cur != 0:
            if cur in seen:
                return f"cycle in head links through token {tok.index}"
            seen.add(cur)
            cur = tokens[cur - 1].head_index
    return None


# -- word lists for the heuristic tagger --------------------------------------

_DETERMINERS = {
    "the", "a", "an", "this", "that", "these", "those", "its", "his", "her",
    "their", "our", "my", "your", "each", "every", "some", "any", "all",
    "both", "another", "such",
}
_AUXILIARIES = {
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have",
    "had", "having", "do", "does", "did", "will", "would", "shall", "should",
    "can", "could", "may", "might", "must",
}
_NEGATORS = {"not", "n't", "never", "no", "neither", "nor", "none", "without", "cannot"}
_ADPOSITIONS = {
    "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "onto",
    "over", "under", "between", "among", "since", "during", "through",
    "against", "amid", "despite", "after", "before", "about", "above",
    "below", "across", "around", "toward", "towards", "within", "per",
    "off", "up", "down", "near", "via", "until",
}
_PRONOUNS = {
    "it", "he", "she", "they", "we", "i", "you", "him", "them", "us", "me",
    "who", "whom", "which", "what", "itself", "himself", "herself",
    "themselves", "something", "nothing", "anything", "everything", "there",
}
_COORDINATORS = {"and", "or", "but", "yet", "so", "plus"}
_SUBORDINATORS = {
    "while", "because", "although", "though", "if", "when", "as", "whereas",
    "unless", "whether", "once", "that",
}
_ADVERBS = {
    "also", "often", "soon", "now", "then", "already", "still", "again",
    "perhaps", "however", "meanwhile", "moreover", "further", "later",
    "earlier", "today", "yesterday", "tomorrow", "ahead", "abroad", "less",
    "more", "most", "least", "very", "too", "quite", "rather", "almost",
    "even", "just", "well",
}
_PROPER_NAMES = {
    "italy", "france", "germany", "spain", "britain", "england", "london",
    "paris", "berlin", "madrid", "rome", "milan", "frankfurt", "brussels",
    "europe", "eurozone", "ecb", "boe", "eu", "uk", "us", "usa", "america",
    "greece", "ireland", "portugal", "austria", "belgium", "poland",
    "sweden", "denmark", "finland", "scotland", "wales", "washington",
    "china", "japan", "russia", "turkey", "brexit",
}
_DEMONYM_ADJ = {
    "french", "german", "italian", "spanish", "british", "english",
    "european", "american", "greek", "irish", "portuguese", "dutch",
    "austrian", "belgian", "polish", "swedish", "danish", "finnish",
    "swiss", "chinese", "japanese", "russian", "turkish", "scottish",
    "welsh", "global", "domestic", "foreign", "continental",
}

_VERB_LEMMAS = {
    "be", "have", "go", "say", "make", "take", "come", "get", "see", "hold",
    "keep", "leave", "meet", "lead", "lose", "pay", "sell", "buy", "bring",
    "think", "tell", "begin", "stand", "understand", "rise", "fall", "grow",
    "decline", "increase", "decrease", "drop", "surge", "slump", "improve",
    "deteriorate", "recover", "collapse", "expand", "contract", "cut",
    "raise", "hike", "lower", "boost", "weaken", "strengthen", "slow",
    "accelerate", "stabilize", "stabilise", "worsen", "rebound", "soar",
    "plunge", "tumble", "climb", "ease", "tighten", "loosen", "warn",
    "expect", "forecast", "predict", "report", "announce", "enter", "exit",
    "experience", "remain", "stay", "continue", "start", "end", "face",
    "suffer", "enjoy", "post", "record", "show", "signal", "suggest",
    "indicate", "reach", "hit", "top", "exceed", "miss", "beat", "shrink",
    "sink", "strike", "widen", "narrow", "cool", "heat", "stall", "falter",
    "struggle", "thrive", "prosper", "boom", "bust", "default", "lend",
    "borrow", "invest", "spend", "save", "employ", "fire", "hire", "produce",
    "consume", "trade", "export", "import", "grew", "add", "reduce", "gain",
    "benefit", "hurt", "harm", "help", "support", "undermine", "threaten",
    "fuel", "dampen", "curb", "spur", "drive", "drag", "lift", "push",
    "pull", "fail", "succeed", "revise", "estimate", "project", "publish",
    "release", "move", "jump", "dip", "slide", "rally", "crash", "recoup",
    "stagnate", "moderate", "pick", "level", "flatten", "plummet", "erode",
    "firm", "soften", "deepen", "persist", "linger", "abate", "subside",
    "intensify", "escalate", "prove", "turn", "look", "seem", "appear",
    "become", "grow",
}
_ADJ_LEMMAS = {
    "strong", "weak", "worst", "worse", "best", "better", "high", "low",
    "higher", "lower", "highest", "lowest", "sharp", "severe", "robust",
    "grim", "bleak", "deep", "steep", "mild", "modest", "solid", "stable",
    "fragile", "weakest", "strongest", "good", "bad", "poor", "great",
    "major", "minor", "big", "small", "large", "huge", "slow", "fast",
    "rapid", "new", "old", "late", "early", "difficult", "hard", "tough",
    "healthy", "unhealthy", "gloomy", "upbeat", "uncertain", "volatile",
    "resilient", "sluggish", "buoyant", "dire", "sound", "shaky", "tepid",
    "flat", "firm", "soft", "tight", "loose", "cheap", "expensive", "rich",
    "broad", "central", "main", "key", "next", "last", "first", "second",
    "third", "recent", "current", "future", "past", "annual", "monthly",
    "quarterly", "due", "likely", "unlikely",
}
_NOUN_LEMMAS = {
    "economy", "bank", "rate", "price", "growth", "recession", "crisis",
    "market", "sector", "output", "production", "activity", "policy",
    "inflation", "unemployment", "quarter", "year", "month", "week", "day",
    "government", "company", "business", "industry", "demand", "supply",
    "trade", "export", "import", "debt", "deficit", "surplus", "budget",
    "tax", "wage", "job", "labor", "labour", "investment", "profit", "loss",
    "revenue", "earning", "stock", "share", "bond", "currency", "euro",
    "pound", "dollar", "economist", "forecast", "estimate", "figure",
    "report", "survey", "index", "indicator", "outlook", "recovery",
    "downturn", "slowdown", "expansion", "boom", "bust", "drop", "decline",
    "increase", "decrease", "rise", "fall", "gain", "cost", "level",
    "number", "percent", "house", "household", "consumer", "spending",
    "confidence", "sentiment", "momentum", "pressure", "risk", "threat",
    "concern", "worry", "fear", "hope", "optimism", "pessimism", "turmoil",
    "stress", "default", "bailout", "stimulus", "austerity", "lending",
    "borrowing", "derivative", "manufacturing", "construction", "factory",
    "auto", "news", "datum", "data", "people", "country", "nation", "region",
}

_CLOSED_CLASS = (
    _DETERMINERS | _AUXILIARIES | _NEGATORS | _ADPOSITIONS | _PRONOUNS
    | _COORDINATORS | _SUBORDINATORS
)

_IRREGULAR_LEMMAS = {
    "is": "be", "are": "be", "was": "be", "were": "be", "been": "be",
    "being": "be", "am": "be", "has": "have", "had": "have",
    "having": "have", "does": "do", "did": "do", "done": "do",
    "rose": "rise", "risen": "rise", "fell": "fall", "fallen": "fall",
    "grew": "grow", "grown": "grow", "went": "go", "gone": "go",
    "said": "say", "made": "make", "took": "take", "taken": "take",
    "came": "come", "got": "get", "gotten": "get", "saw": "see",
    "seen": "see", "held": "hold", "kept": "keep", "left": "leave",
    "met": "meet", "led": "lead", "lost": "lose", "paid": "pay",
    "sold": "sell", "bought": "buy", "brought": "bring", "thought": "think",
    "told": "tell", "began": "begin", "begun": "begin", "stood": "stand",
    "understood": "understand", "shrank": "shrink", "shrunk": "shrink",
    "sank": "sink", "sunk": "sink", "struck": "strike", "drove": "drive",
    "driven": "drive", "men": "man", "women": "woman", "crises": "crisis",
    "indices": "index", "children": "child", "feet": "foot",
}

_VOCAB = _VERB_LEMMAS | _ADJ_LEMMAS | _NOUN_LEMMAS | _DEMONYM_ADJ


def canonical_lemma(word: str) -> str:
    """Reduce a surface form to a lookup lemma, independent of its tag.

    Handles possessives, dotted acronyms ("E.C.B." -> "ecb"), irregular
    forms, plural/3rd-person -s, and -ed/-ing verb inflection. The same
    function is applied to topic phrases and lexicon keys, so matching
    only requires the reduction to be consistent, not linguistically
    perfect.
    """
    w = word.lower().replace("’", "'")
    if w.endswith("'s"):
        w = w[:-2]
    w = w.strip("'")
    if "." in w and w.replace(".", "").isalpha():
        w = w.replace(".", "")
    if w in _IRREGULAR_LEMMAS:
        return _IRREGULAR_LEMMAS[w]
    if w in _CLOSED_CLASS or len(w) <= 3:
        return w
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith("s") and not w.endswith(("ss", "us", "is")):
        c1 = w[:-1]
        c2 = w[:-2] if w.endswith("es") else None
        if c1 in _VOCAB:
            return c1
        if c2 and c2 in _VOCAB:
            return c2
        if w.endswith(("ches", "shes", "xes", "zes", "sses", "oes")):
            return w[:-2]
        return c1
    for suffix in ("ing", "ed"):
        if w.endswith(suffix) and len(w) - len(suffix) >= 3:
            stem = w[: -len(suffix)]
            candidates = [stem, stem + "e"]
            if len(stem) >= 2 and stem[-1] == stem[-2]:
                candidates.append(stem[:-1])
            for c in candidates:
                if c in _VOCAB:
                    return c
            return w
    return w


# -- tokenizer ----------------------------------------------------------------

_WORD_RE = re.compile(r"[^\W\d_]+(?:[.'\-][^\W\d_]+)*\.?|\d[\d.,%]*|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Split a sentence into word, number and punctuation tokens.

    Dotted acronyms and hyphenated words stay single tokens; a trailing
    period is kept only when the token contains internal periods.
    """
    out = []
    for m in _WORD_RE.finditer(text):
        tok = m.group()
        if tok[0].isdigit():
            trailing = []
            while tok and tok[-1] in ".,":
                trailing.append(tok[-1])
                tok = tok[:-1]
            if tok:
                out.append(tok)
            out.extend(reversed(trailing))
        elif tok.endswith(".") and "." not in tok[:-1]:
            out.append(tok[:-1])
            out.append(".")
        else:
            out.append(tok)
    return [t for t in out if t]


# -- heuristic POS tagging and head assignment --------------------------------

_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "ic", "ish", "less")


def _tag_one(surfaces: list[str], position: int, prelim: list[str]) -> str:
    surface = surfaces[position]
    w = surface.lower()
    if not any(ch.isalnum() for ch in surface):
        return "PUNCT"
    if any(ch.isdigit() for ch in surface):
        return "NUM"
    if w in _NEGATORS:
        return "PART"
    if w in _DETERMINERS:
        return "DET"
    if w in _AUXILIARIES:
        return "AUX"
    if w in _ADPOSITIONS:
        return "ADP"
    if w in _PRONOUNS:
        return "PRON"
    if w in _COORDINATORS:
        return "CCONJ"
    if w in _SUBORDINATORS:
        return "SCONJ"
    lemma = canonical_lemma(surface)
    if lemma in _PROPER_NAMES:
        return "PROPN"
    if w in _ADVERBS or (
        w.endswith("ly") and len(w) > 4
        and lemma not in _NOUN_LEMMAS and lemma not in _ADJ_LEMMAS
    ):
        return "ADV"
    if w in _DEMONYM_ADJ or lemma in _DEMONYM_ADJ:
        return "ADJ"
    if lemma in _VERB_LEMMAS and lemma not in _NOUN_LEMMAS:
        if w.endswith("ing") and w in _NOUN_LEMMAS:
            # Gerund used nominally ("bank lending", "spending rose").
            prev = prelim[position - 1] if position > 0 else None
            nxt = surfaces[position + 1] if position + 1 < len(surfaces) else None
            nxt_verbal = nxt is not None and canonical_lemma(nxt) in _VERB_LEMMAS
            if prev in ("DET", "NOUN", "PROPN", "ADJ", "ADP") or nxt_verbal:
                return "NOUN"
        if w.endswith(("ed", "ing")) or w in _IRREGULAR_LEMMAS:
            return "VERB"
        # Bare/-s form inside a determiner-opened noun phrase reads as a noun.
        j = position - 1
        while j >= 0 and prelim[j] in ("NOUN", "PROPN", "ADJ", "NUM"):
            j -= 1
        if j >= 0 and prelim[j] == "DET":
            return "NOUN"
        return "VERB"
    if lemma in _VERB_LEMMAS and lemma in _NOUN_LEMMAS:
        # Ambiguous words ("drop", "rise", "trade"): verbal inflection wins,
        # otherwise treat as a noun.
        if w.endswith(("ed", "ing")) and w not in _NOUN_LEMMAS:
            return "VERB"
        if w in _IRREGULAR_LEMMAS:
            return "VERB"
        return "NOUN"
    if lemma in _ADJ_LEMMAS or w in _ADJ_LEMMAS:
        return "ADJ"
    if w.endswith(_ADJ_SUFFIXES) and len(w) > 4:
        return "ADJ"
    if w.endswith("al") and len(w) > 4 and lemma not in _NOUN_LEMMAS:
        return "ADJ"
    if surface[:1].isupper() and position > 0:
        return "PROPN"
    return "NOUN"


def _tag(surfaces: list[str]) -> list[str]:
    tags: list[str] = []
    for i in range(len(surfaces)):
        tags.append(_tag_one(surfaces, i, tags))
    return tags


def _nearest(i: int, candidates: list[int]) -> int | None:
    if not candidates:
        return None
    return min(candidates, key=lambda j: (abs(i - j), j))


def _nearest_following(i: int, candidates: list[int]) -> int | None:
    following = [j for j in candidates if j > i]
    return following[0] if following else None


def shallow_parse(text: str, article_id: str = "", sentence_index: int = 0) -> Sentence:
    """Parse one sentence with deterministic heuristics.

    Attachment rules: adjectives and determiners go to the nearest
    following noun, adverbs and negators to the nearest verb, nouns to
    the nearest verb (subject before it, object after it), auxiliaries
    to the following content verb; the root is the first content verb,
    falling back to the first auxiliary, then the first noun.
    """
    if not text or not text.strip():
        raise ValueError("cannot parse an empty sentence")
    surfaces = tokenize(text)
    if not surfaces:
        raise ValueError("sentence has no tokens after tokenization")
    tags = _tag(surfaces)
    n = len(surfaces)
    idx = list(range(n))

    content_verbs = [i for i in idx if tags[i] == "VERB"]
    aux_verbs = [i for i in idx if tags[i] == "AUX"]
    attach_verbs = content_verbs if content_verbs else aux_verbs
    nounlike = [i for i in idx if tags[i] in ("NOUN", "PROPN")]

    if content_verbs:
        root = content_verbs[0]
    elif aux_verbs:
        root = aux_verbs[0]
    elif nounlike:
        root = nounlike[0]
    else:
        root = 0

    heads = [root] * n
    rels = ["dep"] * n
    for i in idx:
        if i == root:
            heads[i] = -1
            rels[i] = "root"
            continue
        tag = tags[i]
        if tag == "DET":
            j = _nearest_following(i, nounlike)
            heads[i], rels[i] = (j, "dep") if j is not None else (root, "dep")
        elif tag == "ADJ":
            j = _nearest_following(i, nounlike)
            if j is not None:
                heads[i], rels[i] = j, "amod"
            else:
                j = _nearest(i, attach_verbs)
                heads[i], rels[i] = (j, "dep") if j is not None else (root, "dep")
        elif tag == "ADV":
            j = _nearest(i, attach_verbs)
            if j is not None:
                heads[i], rels[i] = j, "advmod"
            else:
                j = _nearest_following(i, [k for k in idx if tags[k] == "ADJ"])
                heads[i], rels[i] = (j, "advmod") if j is not None else (root, "dep")
        elif tag == "PART":
            j = _nearest(i, attach_verbs)
            if j is None:
                j = _nearest_following(i, [k for k in idx if tags[k] in ("ADJ", "NOUN", "PROPN")])
            heads[i], rels[i] = (j, "neg") if j is not None else (root, "neg")
        elif tag == "VERB":
            heads[i], rels[i] = root, "dep"
        elif tag == "AUX":
            j = _nearest_following(i, content_verbs)
            heads[i], rels[i] = (j, "dep") if j is not None else (root, "dep")
        elif tag in ("NOUN", "PROPN"):
            if i + 1 < n and tags[i + 1] in ("NOUN", "PROPN"):
                heads[i], rels[i] = i + 1, "dep"
            else:
                j = _nearest(i, attach_verbs)
                if j is None:
                    heads[i], rels[i] = root, "dep"
                else:
                    heads[i], rels[i] = j, ("nsubj" if i < j else "dobj")
        elif tag == "PRON":
            j = _nearest(i, attach_verbs)
            if j is None:
                heads[i], rels[i] = root, "dep"
            else:
                heads[i], rels[i] = j, ("nsubj" if i < j else "dobj")
        else:
            j = _nearest(i, attach_verbs)
            heads[i], rels[i] = (j, "dep") if j is not None else (root, "dep")

    tokens = tuple(
        Token(
            index=i + 1,
            surface=surfaces[i],
            lemma=canonical_lemma(surfaces[i]),
            pos=tags[i],
            head_index=heads[i] + 1 if heads[i] >= 0 else 0,
            dep_relation=rels[i],
        )
        for i in idx
    )
    return Sentence(article_id=article_id, sentence_index=sentence_index, tokens=tokens)


# -- columnar parse file reader ----------------------------------------------

_ID_COMMENT_RE = re.compile(r"^#\s*article_id\s*=\s*(.+)$")
_SENT_COMMENT_RE = re.compile(r"^#\s*sentence_index\s*=\s*(\d+)$")


def load_parsed(
    path: str | Path,
    log: DiagnosticLog | None = None,
    known_ids: set[str] | None = None,
) -> Iterator[Sentence]:
    """Stream sentences from a 10-column tab-separated dependency file.

    Each sentence block is preceded by ``# article_id = ...`` and
    ``# sentence_index = ...`` comments and separated by blank lines.
    Multiword-token and empty-node lines (ids with ``-`` or ``.``) are
    skipped. Sentences violating the tree invariants, or carrying an
    article_id outside ``known_ids`` when given, are dropped with a
    diagnostic.
    """
    log = log if log is not None else DiagnosticLog()
    path = Path(path)

    def flush(meta, rows, first_line):
        if not rows:
            return None
        article_id = meta.get("article_id")
        if article_id is None:
            log.add(str(path), "sentence block without article_id comment", line=first_line)
            return None
        if known_ids is not None and article_id not in known_ids:
            log.add(str(path), f"unknown article_id {article_id!r}, sentence skipped", line=first_line)
            return None
        tokens = []
        for cols in rows:
            try:
                tokens.append(
                    Token(
                        index=int(cols[0]),
                        surface=cols[1],
                        lemma=cols[2].lower(),
                        pos=cols[3],
                        head_index=int(cols[6]),
                        dep_relation=cols[7],
                    )
                )
            except (ValueError, IndexError) as exc:
                log.add(str(path), f"bad token line: {exc}", line=first_line)
                return None
        err = validate_tokens(tokens)
        if err:
            log.add(str(path), f"sentence rejected: {err}", line=first_line)
            return None
        return Sentence(
            article_id=article_id,
            sentence_index=int(meta.get("sentence_index", 0)),
            tokens=tuple(tokens),
        )

    meta: dict[str, str] = {}
    rows: list[list[str]] = []
    first_line = 1
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                sent = flush(meta, rows, first_line)
                if sent is not None:
                    yield sent
                meta, rows = {}, []
                continue
            if line.startswith("#"):
                if not rows and not meta:
                    first_line = lineno
                m = _ID_COMMENT_RE.match(line)
                if m:
                    meta["article_id"] = m.group(1).strip()
                    continue
                m = _SENT_COMMENT_RE.match(line)
                if m:
                    meta["sentence_index"] = m.group(1)
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                log.add(str(path), f"expected 10 columns, got {len(cols)}", line=lineno)
                continue
            if "-" in cols[0] or "." in cols[0]:
                continue
            if not rows and not meta:
                first_line = lineno
            rows.append(cols)
    sent = flush(meta, rows, first_line)
    if sent is not None:
        yield sent


def write_parsed(
    path: str | Path, sentences: Iterable[Sentence], header: str | None = None
) -> int:
    """Write sentences in the columnar format ``load_parsed`` reads back.

    Unfilled CoNLL slots (xpos, feats, deps, misc) hold ``_``. Returns the
    number of sentences written.
    """
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n\n")
        for sent in sentences:
            fh.write(f"# article_id = {sent.article_id}\n")
            fh.write(f"# sentence_index = {sent.sentence_index}\n")
            for tok in sent.tokens:
                cols = (
                    str(tok.index), tok.surface, tok.lemma, tok.pos, "_", "_",
                    str(tok.head_index), tok.dep_relation, "_", "_",
                )
                fh.write("\t".join(cols) + "\n")
            fh.write("\n")
            count += 1
    return count
