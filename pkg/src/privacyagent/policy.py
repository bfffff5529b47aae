"""Privacy-disclosure data model and its canonical text format (PPF).

A policy names the collecting entity, its human-readable disclosure page,
any privacy seals, and a list of statements binding purposes, recipients
and a retention policy to data references.
"""

from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import urlparse

from .lexer import ParseError, TokenStream, escape_string, stream
from .schema import DataSchema, UnknownElement, base_schema, resolve_refs

PURPOSES = ("core-service", "customization", "research", "contact", "telemarketing", "profiling")
RECIPIENTS = ("ours", "agents", "same-policies", "unrelated", "public")
RETENTIONS = ("none", "stated-purpose", "legal-requirement", "business-practices", "indefinite")


@dataclass(frozen=True)
class Statement:
    purposes: frozenset[str]
    recipients: frozenset[str]
    retention: str
    data_refs: tuple[str, ...]  # sorted, unique
    consequence: str | None = None


@dataclass(frozen=True)
class PrivacyPolicy:
    entity_name: str
    entity_uri: str
    disclosure_uri: str
    seals: tuple[str, ...]  # sorted, unique
    statements: tuple[Statement, ...]


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning"
    location: str
    message: str


def _is_absolute_uri(s: str) -> bool:
    try:
        parsed = urlparse(s)
    except ValueError:  # e.g. unbalanced brackets in a would-be IPv6 host
        return False
    return bool(parsed.scheme) and bool(parsed.netloc)


def _parse_ident_list(toks: TokenStream, what: str, allowed: tuple[str, ...]) -> frozenset[str]:
    seen: list[str] = []
    while True:
        tok = toks.expect_ident(what)
        if tok.value not in allowed:
            raise ParseError(tok.line, tok.column, f"unknown {what} {tok.value!r}")
        if tok.value in seen:
            raise ParseError(tok.line, tok.column, f"duplicate list item {tok.value!r}")
        seen.append(tok.value)
        if toks.peek().kind == ",":
            toks.next()
            continue
        break
    return frozenset(seen)


def _parse_path_list(toks: TokenStream, schema: DataSchema) -> tuple[str, ...]:
    seen: list[str] = []
    while True:
        tok = toks.expect_ident("data reference")
        try:
            resolve_refs(schema, tok.value)
        except UnknownElement:
            raise ParseError(tok.line, tok.column, f"unknown data element {tok.value!r}")
        if tok.value in seen:
            raise ParseError(tok.line, tok.column, f"duplicate list item {tok.value!r}")
        seen.append(tok.value)
        if toks.peek().kind == ",":
            toks.next()
            continue
        break
    return tuple(sorted(seen))


def _parse_statement(toks: TokenStream, schema: DataSchema) -> Statement:
    toks.expect("{")
    toks.expect_keyword("purpose")
    purposes = _parse_ident_list(toks, "purpose", PURPOSES)
    toks.expect_keyword("recipients")
    recipients = _parse_ident_list(toks, "recipient", RECIPIENTS)
    toks.expect_keyword("retention")
    ret_tok = toks.expect_ident("retention")
    if ret_tok.value not in RETENTIONS:
        raise ParseError(ret_tok.line, ret_tok.column, f"unknown retention {ret_tok.value!r}")
    consequence = None
    if toks.accept_keyword("consequence"):
        consequence = toks.expect_string("consequence")
    toks.expect_keyword("data")
    data_refs = _parse_path_list(toks, schema)
    toks.expect("}")
    return Statement(purposes, recipients, ret_tok.value, data_refs, consequence)


def parse_policy(text: str, schema: DataSchema | None = None) -> PrivacyPolicy:
    """Parse a PPF document; raises ParseError with line/column on the first failure."""
    schema = schema or base_schema()
    toks = stream(text)
    toks.expect_keyword("policy")
    toks.expect("{")
    toks.expect_keyword("entity")
    ent_tok = toks.peek()
    entity_name = toks.expect_string("entity name")
    if not entity_name:
        raise ParseError(ent_tok.line, ent_tok.column, "entity name must be non-empty")
    toks.expect_keyword("uri")
    uri_tok = toks.peek()
    entity_uri = toks.expect_string("entity URI")
    if not _is_absolute_uri(entity_uri):
        raise ParseError(uri_tok.line, uri_tok.column, f"not an absolute URI: {entity_uri!r}")
    toks.expect_keyword("disclosure")
    disc_tok = toks.peek()
    disclosure_uri = toks.expect_string("disclosure URI")
    if not _is_absolute_uri(disclosure_uri):
        raise ParseError(disc_tok.line, disc_tok.column, f"not an absolute URI: {disclosure_uri!r}")
    seals: list[str] = []
    while toks.accept_keyword("seal"):
        seal_tok = toks.peek()
        name = toks.expect_string("seal name")
        if name in seals:
            raise ParseError(seal_tok.line, seal_tok.column, f"duplicate seal {name!r}")
        seals.append(name)
    statements: list[Statement] = []
    while toks.accept_keyword("statement"):
        statements.append(_parse_statement(toks, schema))
    toks.expect("}")
    if not toks.at_end():
        raise toks.error("trailing content after policy block")
    return PrivacyPolicy(
        entity_name=entity_name,
        entity_uri=entity_uri,
        disclosure_uri=disclosure_uri,
        seals=tuple(sorted(seals)),
        statements=tuple(statements),
    )


def _enum_order(values: frozenset[str], order: tuple[str, ...]) -> list[str]:
    return [v for v in order if v in values]


def serialize_policy(policy: PrivacyPolicy) -> str:
    """Canonical PPF form: fixed field order, two-space indent, sorted sets."""
    out: list[str] = ["policy {"]
    out.append(f"  entity {escape_string(policy.entity_name)} uri {escape_string(policy.entity_uri)}")
    out.append(f"  disclosure {escape_string(policy.disclosure_uri)}")
    for seal in sorted(policy.seals):
        out.append(f"  seal {escape_string(seal)}")
    for st in policy.statements:
        out.append("  statement {")
        out.append("    purpose " + ", ".join(_enum_order(st.purposes, PURPOSES)))
        out.append("    recipients " + ", ".join(_enum_order(st.recipients, RECIPIENTS)))
        out.append("    retention " + st.retention)
        if st.consequence is not None:
            out.append("    consequence " + escape_string(st.consequence))
        out.append("    data " + ", ".join(sorted(st.data_refs)))
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


def validate_policy(policy: PrivacyPolicy, schema: DataSchema) -> list[ValidationIssue]:
    """Deployability check; empty result means the policy can drive decisions."""
    issues: list[ValidationIssue] = []
    if not policy.statements:
        issues.append(ValidationIssue("warning", "policy", "no statements: discloses nothing"))
    coverage: dict[str, list[int]] = {}
    for idx, st in enumerate(policy.statements):
        if not st.purposes or not st.recipients or not st.data_refs:
            issues.append(
                ValidationIssue("error", f"statement {idx}", "empty purposes, recipients, or data")
            )
        for ref in st.data_refs:
            try:
                leaves = resolve_refs(schema, ref)
            except UnknownElement:
                issues.append(
                    ValidationIssue("error", f"statement {idx}", f"unknown data element {ref!r}")
                )
                continue
            for leaf in leaves:
                coverage.setdefault(leaf, [])
                if idx not in coverage[leaf]:
                    coverage[leaf].append(idx)
    for leaf in sorted(coverage):
        if len(coverage[leaf]) > 1:
            issues.append(
                ValidationIssue(
                    "warning", leaf, f"element covered by multiple statements: {leaf}"
                )
            )
    return issues


# Phrase tables for the English rendering; docs/rendering-templates.md mirrors these.
PURPOSE_PHRASES = {
    "core-service": "the service you requested",
    "customization": "customizing your experience",
    "research": "research and analysis",
    "contact": "contacting you",
    "telemarketing": "telephone marketing",
    "profiling": "building a profile of you",
}

RECIPIENT_PHRASES = {
    "ours": "this site",
    "agents": "this site's service providers",
    "same-policies": "organizations following the same practices",
    "unrelated": "unrelated third parties",
    "public": "the general public",
}

RETENTION_PHRASES = {
    "none": "not retained after your visit",
    "stated-purpose": "kept only as long as needed for the stated purpose",
    "legal-requirement": "kept as long as the law requires",
    "business-practices": "kept according to the site's business practices",
    "indefinite": "kept indefinitely",
}


def _join_phrases(phrases: list[str]) -> str:
    if len(phrases) == 1:
        return phrases[0]
    return ", ".join(phrases[:-1]) + " and " + phrases[-1]


def render_policy_english(policy: PrivacyPolicy) -> str:
    """Deterministic template-driven English rendering of a policy."""
    out: list[str] = []
    out.append(f"Privacy policy of {policy.entity_name} ({policy.entity_uri})")
    out.append(f"Full policy page: {policy.disclosure_uri}")
    if policy.seals:
        out.append("Privacy seals: " + ", ".join(sorted(policy.seals)))
    out.append("")
    if not policy.statements:
        out.append("This site makes no statements about data collection.")
        out.append("")
    for st in policy.statements:
        lines = [f"Data covered: {', '.join(sorted(st.data_refs))}."]
        purposes = _join_phrases([PURPOSE_PHRASES[p] for p in _enum_order(st.purposes, PURPOSES)])
        lines.append(f"This data will be used only for {purposes}.")
        if st.recipients == frozenset({"ours"}):
            lines.append("It is not shared beyond this site.")
        else:
            recips = _join_phrases(
                [RECIPIENT_PHRASES[r] for r in _enum_order(st.recipients, RECIPIENTS)]
            )
            lines.append(f"It may be shared with {recips}.")
        lines.append(f"It is {RETENTION_PHRASES[st.retention]}.")
        if st.consequence is not None:
            lines.append(f"The site says: {st.consequence}")
        out.append(" ".join(lines))
        out.append("")
    return "\n".join(out)
