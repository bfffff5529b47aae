"""Form agent: parses site data requests (.pdr), checks disclosure/data
coupling, and generates practice-annotated forms pre-filled from the
user's repository.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import policy_hash
from .lexer import ParseError, escape_string, stream
from .policy import PURPOSES, RECIPIENTS, PrivacyPolicy, Statement
from .repository import Repository
from .schema import DataSchema, UnknownElement, resolve_refs


@dataclass(frozen=True)
class RequestItem:
    ref: str  # leaf path or prefix
    required: bool


@dataclass(frozen=True)
class DataRequest:
    label: str
    items: tuple[RequestItem, ...]  # non-empty


@dataclass(frozen=True)
class CoverageReport:
    covered: dict[str, int]  # leaf path -> first covering statement index
    uncovered: tuple[str, ...]
    ambiguous: tuple[str, ...]  # leaves covered by more than one statement


@dataclass(frozen=True)
class FormField:
    path: str
    required: bool
    value: str | None  # None = blank
    purposes: frozenset[str]
    recipients: frozenset[str]
    retention: str
    consequence: str | None
    necessity_flag: bool


@dataclass(frozen=True)
class AnnotatedForm:
    site: str
    policy_hash: str
    label: str
    fields: tuple[FormField, ...]


class CouplingError(Exception):
    def __init__(self, uncovered: tuple[str, ...]):
        self.uncovered = uncovered
        super().__init__("request not fully covered by policy: " + ", ".join(uncovered))


def parse_data_request(text: str) -> DataRequest:
    """Parse a PDR document: data-request { for "label" data <item>, ... }."""
    toks = stream(text)
    toks.expect_keyword("data-request")
    toks.expect("{")
    toks.expect_keyword("for")
    label = toks.expect_string("request label")
    toks.expect_keyword("data")
    items: list[RequestItem] = []
    while True:
        ref_tok = toks.expect_ident("data reference")
        flag_tok = toks.expect_ident("required or optional")
        if flag_tok.value not in ("required", "optional"):
            raise ParseError(flag_tok.line, flag_tok.column, f"expected 'required' or 'optional', found {flag_tok.value!r}")
        items.append(RequestItem(ref_tok.value, flag_tok.value == "required"))
        if toks.peek().kind == ",":
            toks.next()
            continue
        break
    toks.expect("}")
    if not toks.at_end():
        raise toks.error("trailing content after data-request block")
    return DataRequest(label=label, items=tuple(items))


def _request_leaves(request: DataRequest, schema: DataSchema) -> list[tuple[str, bool]]:
    """Resolve request items to (leaf, required) in request order, deduplicated."""
    out: list[tuple[str, bool]] = []
    seen: set[str] = set()
    for item in request.items:
        for leaf in resolve_refs(schema, item.ref):
            if leaf not in seen:
                seen.add(leaf)
                out.append((leaf, item.required))
    return out


def check_coupling(request: DataRequest, policy: PrivacyPolicy, schema: DataSchema) -> CoverageReport:
    """A requested leaf is covered iff some statement's resolved refs contain
    it; the first covering statement in document order is authoritative."""
    stmt_leaves: list[set[str]] = []
    for stmt in policy.statements:
        leaves: set[str] = set()
        for ref in stmt.data_refs:
            try:
                leaves.update(resolve_refs(schema, ref))
            except UnknownElement:
                continue
        stmt_leaves.append(leaves)
    covered: dict[str, int] = {}
    uncovered: list[str] = []
    ambiguous: list[str] = []
    for leaf, _required in _request_leaves(request, schema):
        hits = [i for i, leaves in enumerate(stmt_leaves) if leaf in leaves]
        if not hits:
            uncovered.append(leaf)
            continue
        covered[leaf] = hits[0]
        if len(hits) > 1:
            ambiguous.append(leaf)
    return CoverageReport(covered=covered, uncovered=tuple(uncovered), ambiguous=tuple(ambiguous))


def generate_form(
    request: DataRequest,
    policy: PrivacyPolicy,
    repo: Repository,
    schema: DataSchema,
    site: str = "",
) -> AnnotatedForm:
    """Build the annotated form, or raise CouplingError naming every
    uncovered leaf. Values come only from the repository; no defaults."""
    report = check_coupling(request, policy, schema)
    if report.uncovered:
        raise CouplingError(report.uncovered)
    fields: list[FormField] = []
    for leaf, required in _request_leaves(request, schema):
        stmt: Statement = policy.statements[report.covered[leaf]]
        fields.append(
            FormField(
                path=leaf,
                required=required,
                value=repo.values.get(leaf),
                purposes=stmt.purposes,
                recipients=stmt.recipients,
                retention=stmt.retention,
                consequence=stmt.consequence,
                necessity_flag="core-service" not in stmt.purposes,
            )
        )
    return AnnotatedForm(
        site=site,
        policy_hash=policy_hash(policy),
        label=request.label,
        fields=tuple(fields),
    )


def _enum_order(values: frozenset[str], order: tuple[str, ...]) -> list[str]:
    return [v for v in order if v in values]


def serialize_coverage(report: CoverageReport) -> str:
    lines = ["coverage {"]
    for leaf in sorted(report.covered):
        lines.append(f"  covered {leaf} statement {report.covered[leaf]}")
    for leaf in report.uncovered:
        lines.append(f"  uncovered {leaf}")
    for leaf in report.ambiguous:
        lines.append(f"  ambiguous {leaf}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_form(form: AnnotatedForm) -> str:
    """Deterministic text document: one field block per leaf, request order."""
    lines = ["form {"]
    lines.append(f"  for {escape_string(form.label)}")
    if form.site:
        lines.append(f"  site {escape_string(form.site)}")
    lines.append(f"  policy-hash {escape_string(form.policy_hash)}")
    for f in form.fields:
        lines.append(f"  field {f.path} {{")
        lines.append("    " + ("required" if f.required else "optional"))
        if f.value is None:
            lines.append("    blank")
        else:
            lines.append(f"    value {escape_string(f.value)}")
        lines.append("    purpose " + ", ".join(_enum_order(f.purposes, PURPOSES)))
        lines.append("    recipients " + ", ".join(_enum_order(f.recipients, RECIPIENTS)))
        lines.append("    retention " + f.retention)
        if f.consequence is not None:
            lines.append(f"    consequence {escape_string(f.consequence)}")
        if f.necessity_flag:
            lines.append("    beyond-necessary")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def form_to_dict(form: AnnotatedForm) -> dict:
    """Structured representation for the control API (frozen key names)."""
    return {
        "label": form.label,
        "site": form.site,
        "policy-hash": form.policy_hash,
        "fields": [
            {
                "path": f.path,
                "required": f.required,
                "value": f.value,
                "purposes": _enum_order(f.purposes, PURPOSES),
                "recipients": _enum_order(f.recipients, RECIPIENTS),
                "retention": f.retention,
                "consequence": f.consequence,
                "necessity-flag": f.necessity_flag,
            }
            for f in form.fields
        ],
    }


def coverage_to_dict(report: CoverageReport) -> dict:
    return {
        "covered": {leaf: idx for leaf, idx in sorted(report.covered.items())},
        "uncovered": list(report.uncovered),
        "ambiguous": list(report.ambiguous),
    }
