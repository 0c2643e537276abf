"""Topic definitions: keyword phrases and modifier-head cross products."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .parsing import canonical_lemma

TOPIC_NAMES = ("economy", "finsector", "inflation", "manuf", "monpol", "unemployment")


@dataclass(frozen=True)
class TopicSpec:
    name: str
    single_terms: frozenset[tuple[str, ...]]  # each phrase as a lemma tuple
    cross_products: tuple[tuple[frozenset[str], frozenset[str]], ...]
    keyword_tone: int = 1

    def __post_init__(self):
        if self.keyword_tone not in (1, -1):
            raise ValueError(f"keyword_tone must be +1 or -1, got {self.keyword_tone}")
        for phrase in self.single_terms:
            if not phrase or any(w != w.lower() for w in phrase):
                raise ValueError(f"topic {self.name}: phrases must be nonempty lowercase")


def _lemmatize_phrase(phrase: str) -> tuple[str, ...]:
    return tuple(canonical_lemma(w) for w in phrase.lower().split())


def load_topics(path: str | Path) -> tuple[TopicSpec, ...]:
    """Parse the plain-text topic file.

    Format: ``[name]`` headers, ``tone = +1|-1`` lines, ``term: phrase``
    lines, and ``cross: mod1, mod2 x head1, head2`` lines. Phrases are
    lemmatized on load so matching uses the same reduction as tokens.
    """
    path = Path(path)
    topics: list[TopicSpec] = []
    name = None
    tone = 1
    terms: set[tuple[str, ...]] = set()
    crosses: list[tuple[frozenset[str], frozenset[str]]] = []

    def flush():
        if name is not None:
            topics.append(
                TopicSpec(
                    name=name,
                    single_terms=frozenset(terms),
                    cross_products=tuple(crosses),
                    keyword_tone=tone,
                )
            )

    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                flush()
                name = line[1:-1].strip().lower()
                tone, terms, crosses = 1, set(), []
            elif line.startswith("tone"):
                tone = int(line.split("=", 1)[1].strip())
            elif line.startswith("term:"):
                terms.add(_lemmatize_phrase(line.split(":", 1)[1]))
            elif line.startswith("cross:"):
                body = line.split(":", 1)[1]
                if " x " not in body:
                    raise ValueError(f"{path}:{lineno}: cross line needs ' x ' separator")
                mods, heads = body.split(" x ", 1)
                mod_set = frozenset(canonical_lemma(w.strip()) for w in mods.split(",") if w.strip())
                head_set = frozenset(canonical_lemma(w.strip()) for w in heads.split(",") if w.strip())
                crosses.append((mod_set, head_set))
            else:
                raise ValueError(f"{path}:{lineno}: unrecognized line {line!r}")
    flush()
    names = [t.name for t in topics]
    if len(set(names)) != len(names):
        raise ValueError("duplicate topic names")
    return tuple(topics)


def default_topics() -> tuple[TopicSpec, ...]:
    with resources.as_file(resources.files("newsnowcast.data") / "topics.txt") as p:
        return load_topics(p)
