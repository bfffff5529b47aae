"""Persistent user data repository: typed values keyed by schema leaf paths.

Values are stored in a single user-owned .prf file. Virtual elements
(agent-observed data like cookies) reject writes.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Mapping

from .lexer import ParseError, escape_string, stream
from .schema import DataSchema

GENDER_VALUES = ("female", "male", "other")
_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")


class RepoError(Exception):
    """kind is one of unknown-element, virtual-element, type-mismatch."""

    def __init__(self, kind: str, path: str, message: str | None = None):
        self.kind = kind
        self.path = path
        super().__init__(message or f"{kind}: {path}")


@dataclass(frozen=True)
class Repository:
    values: Mapping[str, str] = field(default_factory=dict)
    # Timestamps are not persisted and excluded from equality.
    modified_at: Mapping[str, str] = field(default_factory=dict, compare=False)


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def check_value(schema: DataSchema, path: str, value: str) -> None:
    """Raise RepoError unless value fits the element's value-type."""
    elem = schema.elements.get(path)
    if elem is None:
        raise RepoError("unknown-element", path)
    if elem.virtual:
        raise RepoError("virtual-element", path)
    if elem.value_type == "date":
        try:
            date.fromisoformat(value)
        except ValueError:
            raise RepoError("type-mismatch", path, f"type-mismatch: {path} expects YYYY-MM-DD date")
    elif elem.value_type == "enum-gender":
        if value not in GENDER_VALUES:
            raise RepoError(
                "type-mismatch", path, f"type-mismatch: {path} expects one of {GENDER_VALUES}"
            )
    elif elem.value_type == "country-code":
        if not _COUNTRY_RE.match(value):
            raise RepoError(
                "type-mismatch", path, f"type-mismatch: {path} expects ISO 3166-1 alpha-2 code"
            )
    # text accepts anything


def repo_set(repo: Repository, schema: DataSchema, path: str, value: str) -> Repository:
    check_value(schema, path, value)
    values = dict(repo.values)
    stamps = dict(repo.modified_at)
    values[path] = value
    stamps[path] = _now()
    return Repository(values=values, modified_at=stamps)


def repo_get(repo: Repository, schema: DataSchema, path: str) -> str | None:
    if path not in schema.elements:
        raise RepoError("unknown-element", path)
    return repo.values.get(path)


def repo_delete(repo: Repository, schema: DataSchema, path: str) -> Repository:
    if path not in schema.elements:
        raise RepoError("unknown-element", path)
    values = dict(repo.values)
    stamps = dict(repo.modified_at)
    values.pop(path, None)
    stamps.pop(path, None)
    return Repository(values=values, modified_at=stamps)


def dumps_repository(repo: Repository) -> str:
    """Canonical .prf form: one value line per entry, lexicographic by path."""
    lines = ["repository {"]
    for path in sorted(repo.values):
        lines.append(f"  value {path} {escape_string(repo.values[path])}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_repository(text: str, schema: DataSchema) -> Repository:
    toks = stream(text)
    toks.expect_keyword("repository")
    toks.expect("{")
    values: dict[str, str] = {}
    stamps: dict[str, str] = {}
    while toks.accept_keyword("value"):
        path_tok = toks.expect_ident("element path")
        path = path_tok.value
        value = toks.expect_string("value")
        try:
            check_value(schema, path, value)
        except RepoError as exc:
            raise ParseError(path_tok.line, path_tok.column, str(exc))
        if path in values:
            raise ParseError(path_tok.line, path_tok.column, f"duplicate entry {path!r}")
        values[path] = value
        stamps[path] = _now()
    toks.expect("}")
    if not toks.at_end():
        raise toks.error("trailing content after repository block")
    return Repository(values=values, modified_at=stamps)


def save_repository(repo: Repository, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_repository(repo))
    os.chmod(path, 0o600)


def load_repository(path: str, schema: DataSchema) -> Repository:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_repository(fh.read(), schema)
