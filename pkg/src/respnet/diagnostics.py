"""Shared diagnostic and source-location types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Severity(enum.IntEnum):
    """Finding severities, ordered so that sorting puts errors first."""

    ERROR = 0
    WARNING = 1
    INFO = 2

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class SourceSpan:
    """Location of a token run inside a source file (1-based line/column)."""

    file: str
    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    """A coded finding attached to zero or more scenario entities."""

    severity: Severity
    code: str
    message: str
    subjects: tuple[str, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)

    def sort_key(self) -> tuple:
        return (int(self.severity), self.code, self.subjects, self.message)

    def render(self, default_file: str = "") -> str:
        """Render as FILE:LINE:COL: severity[CODE]: message."""
        if self.span is not None:
            prefix = f"{self.span.file}:{self.span.line}:{self.span.column}"
        else:
            prefix = default_file
        return f"{prefix}: {self.severity}[{self.code}]: {self.message}"
