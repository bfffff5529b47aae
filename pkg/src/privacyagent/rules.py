"""Preference rule language (APR format): ordered rules with boolean
conditions over a policy and one of four escalating actions, evaluated
first-match-wins. Ships three canned presets (relaxed, cautious, strict).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Union

from .lexer import ParseError, TokenStream, escape_string, stream
from .policy import PURPOSES, RECIPIENTS, RETENTIONS
from .schema import CATEGORIES, DataSchema, known_ref

ACTIONS = ("accept", "inform", "warn", "block")

PRESET_NAMES = ("relaxed", "cautious", "strict")

# Statement predicate kinds and the vocabulary each draws from.
_SET_PRED_VOCAB = {
    "purpose-includes": PURPOSES,
    "purpose-within": PURPOSES,
    "recipients-includes": RECIPIENTS,
    "recipients-within": RECIPIENTS,
    "retention-is": RETENTIONS,
    "retention-in": RETENTIONS,
    "category-includes": CATEGORIES,
}


class UnknownPreset(Exception):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown preset: {name}")


@dataclass(frozen=True)
class StmtPred:
    kind: str  # purpose-includes, purpose-within, recipients-includes, recipients-within,
    #            retention-is, retention-in, data-under, data-includes, category-includes
    values: tuple[str, ...]


@dataclass(frozen=True)
class StatementAtom:
    quantifier: str  # "any" | "all"
    pred: StmtPred


@dataclass(frozen=True)
class SealAtom:
    seal_name: str | None  # None = any seal


@dataclass(frozen=True)
class Not:
    child: "Condition"


@dataclass(frozen=True)
class And:
    parts: tuple["Condition", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Condition", ...]


Condition = Union[StatementAtom, SealAtom, Not, And, Or]


@dataclass(frozen=True)
class Rule:
    action: str
    condition: Condition
    explanation: str | None = None


@dataclass(frozen=True)
class RuleSet:
    name: str
    rules: tuple[Rule, ...]
    default_action: str
    on_missing_policy: str = "warn"


def _parse_action(toks: TokenStream) -> str:
    tok = toks.expect_ident("action")
    if tok.value not in ACTIONS:
        raise ParseError(tok.line, tok.column, f"unknown action {tok.value!r}")
    return tok.value


def _parse_vocab_set(toks: TokenStream, vocab: tuple[str, ...], what: str) -> tuple[str, ...]:
    toks.expect("{")
    seen: list[str] = []
    while True:
        tok = toks.expect_ident(what)
        if tok.value not in vocab:
            raise ParseError(tok.line, tok.column, f"unknown {what} {tok.value!r}")
        if tok.value in seen:
            raise ParseError(tok.line, tok.column, f"duplicate list item {tok.value!r}")
        seen.append(tok.value)
        if toks.peek().kind == ",":
            toks.next()
            continue
        break
    toks.expect("}")
    return tuple(sorted(seen, key=vocab.index))


def _parse_stmt_pred(toks: TokenStream) -> StmtPred:
    head = toks.expect_ident("statement predicate")
    if head.value == "purpose":
        if toks.accept_keyword("includes"):
            tok = toks.expect_ident("purpose")
            if tok.value not in PURPOSES:
                raise ParseError(tok.line, tok.column, f"unknown purpose {tok.value!r}")
            return StmtPred("purpose-includes", (tok.value,))
        toks.expect_keyword("within")
        return StmtPred("purpose-within", _parse_vocab_set(toks, PURPOSES, "purpose"))
    if head.value == "recipients":
        if toks.accept_keyword("includes"):
            tok = toks.expect_ident("recipient")
            if tok.value not in RECIPIENTS:
                raise ParseError(tok.line, tok.column, f"unknown recipient {tok.value!r}")
            return StmtPred("recipients-includes", (tok.value,))
        toks.expect_keyword("within")
        return StmtPred("recipients-within", _parse_vocab_set(toks, RECIPIENTS, "recipient"))
    if head.value == "retention":
        if toks.accept_keyword("is"):
            tok = toks.expect_ident("retention")
            if tok.value not in RETENTIONS:
                raise ParseError(tok.line, tok.column, f"unknown retention {tok.value!r}")
            return StmtPred("retention-is", (tok.value,))
        toks.expect_keyword("in")
        return StmtPred("retention-in", _parse_vocab_set(toks, RETENTIONS, "retention"))
    if head.value == "data":
        if toks.accept_keyword("under"):
            tok = toks.expect_ident("data prefix")
            return StmtPred("data-under", (tok.value,))
        toks.expect_keyword("includes")
        tok = toks.expect_ident("data path")
        return StmtPred("data-includes", (tok.value,))
    if head.value == "category":
        toks.expect_keyword("includes")
        tok = toks.expect_ident("category")
        if tok.value not in CATEGORIES:
            raise ParseError(tok.line, tok.column, f"unknown category {tok.value!r}")
        return StmtPred("category-includes", (tok.value,))
    raise ParseError(head.line, head.column, f"unknown statement predicate {head.value!r}")


def _parse_atom(toks: TokenStream) -> Condition:
    tok = toks.expect_ident("condition atom")
    if tok.value in ("any-statement", "all-statements"):
        toks.expect("(")
        pred = _parse_stmt_pred(toks)
        toks.expect(")")
        return StatementAtom("any" if tok.value == "any-statement" else "all", pred)
    if tok.value == "policy":
        toks.expect("(")
        ptok = toks.expect_ident("policy predicate")
        if ptok.value != "has-seal":
            raise ParseError(ptok.line, ptok.column, f"unknown policy predicate {ptok.value!r}")
        name = None
        if toks.peek().kind == "string":
            name = toks.next().value
        toks.expect(")")
        return SealAtom(name)
    raise ParseError(tok.line, tok.column, f"unknown condition atom {tok.value!r}")


def _parse_unary(toks: TokenStream) -> Condition:
    if toks.accept_keyword("not"):
        return Not(_parse_unary(toks))
    if toks.peek().kind == "(":
        toks.next()
        cond = _parse_condition(toks)
        toks.expect(")")
        return cond
    return _parse_atom(toks)


def _parse_and(toks: TokenStream) -> Condition:
    parts = [_parse_unary(toks)]
    while toks.accept_keyword("and"):
        parts.append(_parse_unary(toks))
    if len(parts) == 1:
        return parts[0]
    flat: list[Condition] = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, And) else [p])
    return And(tuple(flat))


def _parse_condition(toks: TokenStream) -> Condition:
    parts = [_parse_and(toks)]
    while toks.accept_keyword("or"):
        parts.append(_parse_and(toks))
    if len(parts) == 1:
        return parts[0]
    flat: list[Condition] = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Or) else [p])
    return Or(tuple(flat))


def parse_ruleset(text: str) -> RuleSet:
    """Parse an APR document; the default action is mandatory and last."""
    toks = stream(text)
    toks.expect_keyword("ruleset")
    name = toks.expect_string("ruleset name")
    toks.expect("{")
    on_missing = "warn"
    if toks.accept_keyword("on-missing-policy"):
        on_missing = _parse_action(toks)
    rules: list[Rule] = []
    default_action: str | None = None
    while True:
        if toks.accept_keyword("rule"):
            if default_action is not None:
                raise toks.error("rule after default")
            action = _parse_action(toks)
            toks.expect_keyword("when")
            condition = _parse_condition(toks)
            explanation = None
            if toks.accept_keyword("explain"):
                explanation = toks.expect_string("explanation")
            rules.append(Rule(action, condition, explanation))
            continue
        if toks.accept_keyword("default"):
            if default_action is not None:
                raise toks.error("duplicate default")
            default_action = _parse_action(toks)
            continue
        break
    if default_action is None:
        raise toks.error("missing default action")
    toks.expect("}")
    if not toks.at_end():
        raise toks.error("trailing content after ruleset block")
    return RuleSet(name=name, rules=tuple(rules), default_action=default_action, on_missing_policy=on_missing)


def _serialize_pred(pred: StmtPred) -> str:
    kind = pred.kind
    if kind == "purpose-includes":
        return f"purpose includes {pred.values[0]}"
    if kind == "purpose-within":
        return "purpose within {" + ", ".join(pred.values) + "}"
    if kind == "recipients-includes":
        return f"recipients includes {pred.values[0]}"
    if kind == "recipients-within":
        return "recipients within {" + ", ".join(pred.values) + "}"
    if kind == "retention-is":
        return f"retention is {pred.values[0]}"
    if kind == "retention-in":
        return "retention in {" + ", ".join(pred.values) + "}"
    if kind == "data-under":
        return f"data under {pred.values[0]}"
    if kind == "data-includes":
        return f"data includes {pred.values[0]}"
    if kind == "category-includes":
        return f"category includes {pred.values[0]}"
    raise ValueError(f"unknown predicate kind {kind!r}")


def _serialize_condition(cond: Condition, parent_prec: int = 0) -> str:
    # precedence: or=1, and=2, not=3, atom=4; parenthesize when below parent.
    if isinstance(cond, StatementAtom):
        head = "any-statement" if cond.quantifier == "any" else "all-statements"
        return f"{head}({_serialize_pred(cond.pred)})"
    if isinstance(cond, SealAtom):
        if cond.seal_name is None:
            return "policy(has-seal)"
        return f"policy(has-seal {escape_string(cond.seal_name)})"
    if isinstance(cond, Not):
        inner = _serialize_condition(cond.child, 3)
        text = f"not {inner}"
        prec = 3
    elif isinstance(cond, And):
        text = " and ".join(_serialize_condition(p, 2) for p in cond.parts)
        prec = 2
    elif isinstance(cond, Or):
        text = " or ".join(_serialize_condition(p, 1) for p in cond.parts)
        prec = 1
    else:
        raise ValueError(f"unknown condition node {cond!r}")
    if prec < parent_prec:
        return f"({text})"
    return text


def serialize_ruleset(rs: RuleSet) -> str:
    """Canonical APR form; on-missing-policy emitted only when not the warn default."""
    lines = [f"ruleset {escape_string(rs.name)} {{"]
    if rs.on_missing_policy != "warn":
        lines.append(f"  on-missing-policy {rs.on_missing_policy}")
    for rule in rs.rules:
        line = f"  rule {rule.action} when {_serialize_condition(rule.condition)}"
        if rule.explanation is not None:
            line += f" explain {escape_string(rule.explanation)}"
        lines.append(line)
    lines.append(f"  default {rs.default_action}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def ruleset_warnings(rs: RuleSet, schema: DataSchema) -> list[str]:
    """Non-fatal issues: data predicates naming paths the schema does not know.

    Such atoms simply never match; sites may rely on extensions the user
    has not loaded, so this is a warning rather than an error.
    """
    warnings: list[str] = []

    def walk(cond: Condition) -> None:
        if isinstance(cond, StatementAtom):
            if cond.pred.kind in ("data-under", "data-includes"):
                ref = cond.pred.values[0]
                if not known_ref(schema, ref):
                    warnings.append(f"unknown data element in condition: {ref}")
        elif isinstance(cond, Not):
            walk(cond.child)
        elif isinstance(cond, (And, Or)):
            for p in cond.parts:
                walk(p)

    for rule in rs.rules:
        walk(rule.condition)
    return warnings


def preset_text(name: str) -> str:
    """Raw APR text of a canned preset file."""
    if name not in PRESET_NAMES:
        raise UnknownPreset(name)
    return resources.files("privacyagent.presets").joinpath(f"{name}.apr").read_text("utf-8")


def preset(name: str) -> RuleSet:
    """One of the three canned rulesets: relaxed, cautious, strict."""
    return parse_ruleset(preset_text(name))
