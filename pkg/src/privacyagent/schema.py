"""Hierarchical data-element schema: the frozen built-in table, extension
loading (.pds files), and prefix resolution.

Element paths form a proper tree: no path is a strict prefix of another.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .lexer import ParseError, stream

VALUE_TYPES = ("text", "date", "enum-gender", "country-code")

CATEGORIES = (
    "physical-contact",
    "online-contact",
    "unique-id",
    "financial",
    "computer",
    "navigation",
    "interactive",
    "demographic",
    "preference",
    "government-id",
    "health",
    "content",
    "state",
)


class UnknownElement(Exception):
    def __init__(self, ref: str):
        self.ref = ref
        super().__init__(f"unknown data element: {ref}")


class ConflictError(Exception):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(message)


@dataclass(frozen=True)
class DataElementDef:
    path: str
    value_type: str
    category: str
    virtual: bool = False
    source_uri: str | None = None


@dataclass(frozen=True)
class DataSchema:
    elements: Mapping[str, DataElementDef]
    source_uris: tuple[str, ...] = ()

    def leaves(self) -> list[str]:
        return sorted(self.elements)


# The frozen base table: (path, value-type, category, virtual).
# Normative copy; docs/base-schema.md is generated from this table.
BASE_ELEMENTS: tuple[tuple[str, str, str, bool], ...] = (
    ("user.name.prefix", "text", "physical-contact", False),
    ("user.name.given", "text", "physical-contact", False),
    ("user.name.middle", "text", "physical-contact", False),
    ("user.name.family", "text", "physical-contact", False),
    ("user.name.suffix", "text", "physical-contact", False),
    ("user.bday", "date", "demographic", False),
    ("user.gender", "enum-gender", "demographic", False),
    ("user.login.id", "text", "unique-id", False),
    ("user.login.password", "text", "unique-id", False),
    ("user.home-info.postal.street", "text", "physical-contact", False),
    ("user.home-info.postal.city", "text", "physical-contact", False),
    ("user.home-info.postal.state", "text", "physical-contact", False),
    ("user.home-info.postal.postal-code", "text", "physical-contact", False),
    ("user.home-info.postal.country", "country-code", "physical-contact", False),
    ("user.home-info.telecom.phone", "text", "physical-contact", False),
    ("user.home-info.online.email", "text", "online-contact", False),
    ("user.business-info.postal.street", "text", "physical-contact", False),
    ("user.business-info.postal.city", "text", "physical-contact", False),
    ("user.business-info.postal.state", "text", "physical-contact", False),
    ("user.business-info.postal.postal-code", "text", "physical-contact", False),
    ("user.business-info.postal.country", "country-code", "physical-contact", False),
    ("user.business-info.telecom.phone", "text", "physical-contact", False),
    ("user.business-info.online.email", "text", "online-contact", False),
    ("user.employer", "text", "demographic", False),
    ("dynamic.cookies", "text", "state", True),
    ("dynamic.clickstream", "text", "navigation", True),
    ("dynamic.http.referrer", "text", "navigation", True),
)


def _check_tree(paths: Iterable[str]) -> None:
    ordered = sorted(paths)
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a + "."):
            raise ConflictError(a, f"element path {a!r} is a prefix of {b!r}")


_BASE: DataSchema | None = None


def base_schema() -> DataSchema:
    """The frozen built-in schema (27 elements)."""
    global _BASE
    if _BASE is None:
        elements = {
            path: DataElementDef(path, vtype, category, virtual)
            for path, vtype, category, virtual in BASE_ELEMENTS
        }
        _check_tree(elements)
        _BASE = DataSchema(elements=elements)
    return _BASE


def resolve_refs(schema: DataSchema, ref: str) -> tuple[str, ...]:
    """Resolve a leaf path or prefix to the sorted tuple of leaves beneath it.

    Raises UnknownElement when the ref matches nothing.
    """
    if ref in schema.elements:
        return (ref,)
    prefix = ref + "."
    hits = tuple(sorted(p for p in schema.elements if p.startswith(prefix)))
    if not hits:
        raise UnknownElement(ref)
    return hits


def known_ref(schema: DataSchema, ref: str) -> bool:
    try:
        resolve_refs(schema, ref)
    except UnknownElement:
        return False
    return True


def load_schema_extension(text: str, base: DataSchema) -> DataSchema:
    """Parse a .pds extension document and merge it into ``base``.

    Grammar: dataschema string "{" ("element" path "type" ident
    "category" ident ["virtual"])* "}"
    """
    toks = stream(text)
    toks.expect_keyword("dataschema")
    uri_tok = toks.peek()
    source_uri = toks.expect_string("schema URI")
    if not source_uri:
        raise ParseError(uri_tok.line, uri_tok.column, "schema URI must be non-empty")
    toks.expect("{")
    new: dict[str, DataElementDef] = {}
    while toks.accept_keyword("element"):
        path_tok = toks.expect_ident("element path")
        path = path_tok.value
        toks.expect_keyword("type")
        vt_tok = toks.expect_ident("value type")
        if vt_tok.value not in VALUE_TYPES:
            raise ParseError(vt_tok.line, vt_tok.column, f"unknown value type {vt_tok.value!r}")
        toks.expect_keyword("category")
        cat_tok = toks.expect_ident("category")
        if cat_tok.value not in CATEGORIES:
            raise ParseError(cat_tok.line, cat_tok.column, f"unknown category {cat_tok.value!r}")
        virtual = toks.accept_keyword("virtual")
        if path in new:
            raise ParseError(path_tok.line, path_tok.column, f"duplicate element {path!r}")
        new[path] = DataElementDef(path, vt_tok.value, cat_tok.value, virtual, source_uri)
    toks.expect("}")
    if not toks.at_end():
        raise toks.error("trailing content after dataschema block")

    merged = dict(base.elements)
    for path, elem in new.items():
        for existing in merged:
            if (
                path == existing
                or existing.startswith(path + ".")
                or path.startswith(existing + ".")
            ):
                raise ConflictError(
                    path, f"extension element {path!r} conflicts with existing {existing!r}"
                )
        merged[path] = elem
    _check_tree(merged)
    uris = tuple(sorted(set(base.source_uris) | {source_uri}))
    return DataSchema(elements=merged, source_uris=uris)


def schema_table_markdown(schema: DataSchema | None = None) -> str:
    """Render the schema as the documentation table (one row per element)."""
    schema = schema or base_schema()
    lines = ["| path | type | category | virtual |", "| --- | --- | --- | --- |"]
    for path in sorted(schema.elements):
        e = schema.elements[path]
        lines.append(f"| {e.path} | {e.value_type} | {e.category} | {'yes' if e.virtual else 'no'} |")
    return "\n".join(lines) + "\n"
