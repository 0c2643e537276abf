"""Geographic lookup: country names, demonyms and major cities to ISO codes."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .parsing import canonical_lemma

SUPPORTED_COUNTRIES = ("DE", "ES", "FR", "IT", "UK")


@dataclass(frozen=True)
class LocationGazetteer:
    # phrase (lemma tuple) -> ISO country code
    names: dict[tuple[str, ...], str]

    def __post_init__(self):
        for phrase, code in self.names.items():
            if code != code.upper() or len(code) != 2:
                raise ValueError(f"bad country code {code!r} for {phrase!r}")

    def lookup(self, phrase: tuple[str, ...]) -> str | None:
        return self.names.get(phrase)

    @property
    def max_len(self) -> int:
        return max((len(p) for p in self.names), default=1)


def load_gazetteer(path: str | Path) -> LocationGazetteer:
    """Read ``name,country`` CSV rows; names may be multiword phrases."""
    names: dict[tuple[str, ...], str] = {}
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValueError(f"{path}:{lineno}: expected 'name,country'")
            phrase = tuple(canonical_lemma(w) for w in parts[0].lower().split())
            names[phrase] = parts[1].upper()
    return LocationGazetteer(names=names)


def default_gazetteer() -> LocationGazetteer:
    with resources.as_file(resources.files("newsnowcast.data") / "gazetteer.csv") as p:
        return load_gazetteer(p)
