"""Per-record diagnostics emitted by ingestion and validation steps."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    source: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"{self.source}:{self.line}" if self.line is not None else self.source
        return f"{where}: {self.message}"


@dataclass
class DiagnosticLog:
    """Collects diagnostics; never raises, callers decide severity."""

    records: list[Diagnostic] = field(default_factory=list)

    def add(self, source: str, message: str, line: int | None = None) -> None:
        self.records.append(Diagnostic(source, message, line))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)
