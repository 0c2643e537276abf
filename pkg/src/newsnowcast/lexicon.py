"""Fine-grained sentiment dictionary: scored lemmas, negators, intensifiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, float] = field(default_factory=dict)
    negators: frozenset[str] = frozenset()
    intensifiers: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for lemma, score in self.entries.items():
            if not -1.0 <= score <= 1.0:
                raise ValueError(f"score for {lemma!r} outside [-1, 1]: {score}")
        for lemma, mult in self.intensifiers.items():
            if not 0.0 < mult <= 4.0:
                raise ValueError(f"multiplier for {lemma!r} outside (0, 4]: {mult}")

    def score(self, lemma: str) -> float | None:
        return self.entries.get(lemma.lower())

    def is_negator(self, lemma: str) -> bool:
        return lemma.lower() in self.negators

    def multiplier(self, lemma: str) -> float | None:
        return self.intensifiers.get(lemma.lower())


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a sectioned CSV: ``[entries]`` lemma,score rows, ``[negators]``
    one lemma per row, ``[intensifiers]`` lemma,multiplier rows.

    Lines starting with ``#`` and blank lines are skipped. Raises
    ValueError on malformed rows or out-of-range values.
    """
    entries: dict[str, float] = {}
    negators: set[str] = set()
    intensifiers: dict[str, float] = {}
    section = "entries"
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip().lower()
                if section not in ("entries", "negators", "intensifiers"):
                    raise ValueError(f"{path}:{lineno}: unknown section {section!r}")
                continue
            if section == "negators":
                negators.add(line.split(",")[0].strip().lower())
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'lemma,value'")
            lemma = parts[0].lower()
            try:
                value = float(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad number {parts[1]!r}") from exc
            if section == "entries":
                entries[lemma] = value
            else:
                intensifiers[lemma] = value
    return Lexicon(entries=entries, negators=frozenset(negators), intensifiers=intensifiers)


def default_lexicon() -> Lexicon:
    with resources.as_file(resources.files("newsnowcast.data") / "lexicon.csv") as p:
        return load_lexicon(p)
