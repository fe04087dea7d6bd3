"""Schema catalog definitions and localization helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional


@dataclass(frozen=True)
class ColumnDef:
    name: str
    data_type: str
    nullable: bool = True
    primary_key: bool = False
    auto_generated: bool = False
    editable: bool = True
    max_length: Optional[int] = None
    fk_target: Optional[tuple[str, str]] = None  # (table, column)
    titles: Mapping[str, str] = field(default_factory=dict)
    description: Optional[str] = None


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    singular_titles: Mapping[str, str] = field(default_factory=dict)
    plural_titles: Mapping[str, str] = field(default_factory=dict)
    description: Optional[str] = None
    display_column: Optional[str] = None

    @property
    def primary_key(self) -> ColumnDef:
        return next(c for c in self.columns if c.primary_key)

    @property
    def pk_index(self) -> int:
        return next(i for i, c in enumerate(self.columns) if c.primary_key)

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Optional[ColumnDef]:
        for c in self.columns:
            if c.name == name:
                return c
        return None

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    @property
    def has_identity(self) -> bool:
        return any(c.auto_generated for c in self.columns)


def localize(titles: Mapping[str, str], language: Optional[str], default_language: str, fallback: str) -> str:
    """Requested language, then the provider default, then ``fallback``."""
    if language and titles.get(language):
        return titles[language]
    if titles.get(default_language):
        return titles[default_language]
    return fallback
