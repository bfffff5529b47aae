"""Decision engine: evaluates a policy (or its absence) against a ruleset,
producing auditable Decisions. Maintains the per-site decision cache and the
store of remembered user overrides, which outrank the ruleset.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .lexer import ParseError, stream
from .policy import PrivacyPolicy, Statement, serialize_policy
from .rules import (
    ACTIONS,
    And,
    Condition,
    Not,
    Or,
    Rule,
    RuleSet,
    SealAtom,
    StatementAtom,
    StmtPred,
    serialize_ruleset,
)
from .schema import DataSchema, UnknownElement, resolve_refs


class InvalidAction(Exception):
    pass


class OverrideParseError(ParseError):
    pass


@dataclass(frozen=True)
class Decision:
    action: str
    fired_rule: str  # "1".."n" | "default" | "missing-policy" | "override"
    ruleset_name: str
    explanation: str
    policy_hash: str | None
    decided_at: str


@dataclass(frozen=True)
class OverrideEntry:
    action: str  # accept | block
    scope: str  # session | persistent
    created_at: str


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def policy_hash(policy: PrivacyPolicy) -> str:
    """SHA-256 of the canonical serialization, hex-encoded."""
    return hashlib.sha256(serialize_policy(policy).encode("utf-8")).hexdigest()


def ruleset_hash(rs: RuleSet) -> str:
    return hashlib.sha256(serialize_ruleset(rs).encode("utf-8")).hexdigest()


def _stmt_leaves(stmt: Statement, schema: DataSchema) -> set[str]:
    leaves: set[str] = set()
    for ref in stmt.data_refs:
        try:
            leaves.update(resolve_refs(schema, ref))
        except UnknownElement:
            continue  # refs from unloaded extensions never match
    return leaves


def _stmt_pred_holds(stmt: Statement, pred: StmtPred, schema: DataSchema) -> bool:
    kind = pred.kind
    if kind == "purpose-includes":
        return pred.values[0] in stmt.purposes
    if kind == "purpose-within":
        return stmt.purposes <= set(pred.values)
    if kind == "recipients-includes":
        return pred.values[0] in stmt.recipients
    if kind == "recipients-within":
        return stmt.recipients <= set(pred.values)
    if kind == "retention-is":
        return stmt.retention == pred.values[0]
    if kind == "retention-in":
        return stmt.retention in pred.values
    if kind == "data-under":
        prefix = pred.values[0]
        return any(
            leaf == prefix or leaf.startswith(prefix + ".") for leaf in _stmt_leaves(stmt, schema)
        )
    if kind == "data-includes":
        return pred.values[0] in _stmt_leaves(stmt, schema)
    if kind == "category-includes":
        return any(
            schema.elements[leaf].category == pred.values[0]
            for leaf in _stmt_leaves(stmt, schema)
        )
    raise ValueError(f"unknown predicate kind {kind!r}")


def eval_atom(policy: PrivacyPolicy, atom: Condition, schema: DataSchema) -> bool:
    """Evaluate a single condition atom against a policy.

    any-statement is existential (false on zero statements); all-statements
    is universal (vacuously true on zero statements).
    """
    if isinstance(atom, StatementAtom):
        if atom.quantifier == "any":
            return any(_stmt_pred_holds(s, atom.pred, schema) for s in policy.statements)
        return all(_stmt_pred_holds(s, atom.pred, schema) for s in policy.statements)
    if isinstance(atom, SealAtom):
        if atom.seal_name is None:
            return bool(policy.seals)
        return atom.seal_name in policy.seals
    raise TypeError(f"not an atom: {atom!r}")


def eval_condition(policy: PrivacyPolicy, cond: Condition, schema: DataSchema) -> bool:
    if isinstance(cond, Not):
        return not eval_condition(policy, cond.child, schema)
    if isinstance(cond, And):
        return all(eval_condition(policy, p, schema) for p in cond.parts)
    if isinstance(cond, Or):
        return any(eval_condition(policy, p, schema) for p in cond.parts)
    return eval_atom(policy, cond, schema)


def _rule_explanation(rule: Rule, position: int, rs: RuleSet) -> str:
    if rule.explanation is not None:
        return rule.explanation
    return f"matched rule {position} of ruleset \"{rs.name}\""


def evaluate(policy: PrivacyPolicy, rs: RuleSet, schema: DataSchema) -> Decision:
    """First-match evaluation: the action of the first rule whose condition
    holds, else the default. Pure in (policy, ruleset, schema)."""
    for position, rule in enumerate(rs.rules, start=1):
        if eval_condition(policy, rule.condition, schema):
            return Decision(
                action=rule.action,
                fired_rule=str(position),
                ruleset_name=rs.name,
                explanation=_rule_explanation(rule, position, rs),
                policy_hash=policy_hash(policy),
                decided_at=_now(),
            )
    return Decision(
        action=rs.default_action,
        fired_rule="default",
        ruleset_name=rs.name,
        explanation=f"no rule matched; default action of ruleset \"{rs.name}\"",
        policy_hash=policy_hash(policy),
        decided_at=_now(),
    )


def missing_policy_decision(rs: RuleSet) -> Decision:
    return Decision(
        action=rs.on_missing_policy,
        fired_rule="missing-policy",
        ruleset_name=rs.name,
        explanation=f"no privacy policy available; ruleset \"{rs.name}\" treats missing policies as {rs.on_missing_policy}",
        policy_hash=None,
        decided_at=_now(),
    )


class OverrideStore:
    """Remembered accept/block answers keyed by (origin, policy-hash).

    Session-scoped entries live only in memory; persistent entries are
    written to the .ovr file. Writes are serialized by a lock.
    """

    def __init__(self, path: str | None = None):
        self.path = path
        self._entries: dict[tuple[str, str], OverrideEntry] = {}
        self._lock = threading.Lock()

    def get(self, origin: str, phash: str) -> OverrideEntry | None:
        return self._entries.get((origin, phash))

    def entries(self) -> dict[tuple[str, str], OverrideEntry]:
        with self._lock:
            return dict(self._entries)

    def record(self, origin: str, phash: str, action: str, scope: str) -> None:
        if action not in ("accept", "block"):
            raise InvalidAction(f"override action must be accept or block, not {action!r}")
        if scope not in ("session", "persistent"):
            raise InvalidAction(f"override scope must be session or persistent, not {scope!r}")
        with self._lock:
            self._entries[(origin, phash)] = OverrideEntry(action, scope, _now())
            if scope == "persistent" and self.path:
                self._save_locked()

    def _save_locked(self) -> None:
        assert self.path is not None
        lines = ["overrides {"]
        for (origin, phash) in sorted(self._entries):
            e = self._entries[(origin, phash)]
            if e.scope != "persistent":
                continue  # session entries never written
            lines.append(f"  entry \"{origin}\" \"{phash}\" {e.action} {e.scope} \"{e.created_at}\"")
        lines.append("}")
        with open(self.path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        os.chmod(self.path, 0o600)

    def save(self) -> None:
        if self.path:
            with self._lock:
                self._save_locked()

    def load(self) -> None:
        if not self.path or not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            text = fh.read()
        toks = stream(text)
        toks.expect_keyword("overrides")
        toks.expect("{")
        entries: dict[tuple[str, str], OverrideEntry] = {}
        while toks.accept_keyword("entry"):
            origin = toks.expect_string("origin")
            phash = toks.expect_string("policy hash")
            action_tok = toks.expect_ident("action")
            if action_tok.value not in ("accept", "block"):
                raise ParseError(action_tok.line, action_tok.column, f"invalid override action {action_tok.value!r}")
            scope_tok = toks.expect_ident("scope")
            if scope_tok.value != "persistent":
                raise ParseError(scope_tok.line, scope_tok.column, "stored overrides must be persistent")
            created = toks.expect_string("timestamp")
            entries[(origin, phash)] = OverrideEntry(action_tok.value, "persistent", created)
        toks.expect("}")
        with self._lock:
            self._entries = entries


def record_override(overrides: OverrideStore, origin: str, phash: str, action: str, scope: str) -> OverrideStore:
    overrides.record(origin, phash, action, scope)
    return overrides


class DecisionCache:
    """In-memory cache keyed by (origin, policy-hash, ruleset-hash) with a TTL."""

    def __init__(self, ttl: float = 86400.0):
        self.ttl = ttl
        self._entries: dict[tuple[str, str | None, str], tuple[Decision, float]] = {}
        self._lock = threading.Lock()

    def get(self, origin: str, phash: str | None, rhash: str) -> Decision | None:
        with self._lock:
            hit = self._entries.get((origin, phash, rhash))
            if hit is None:
                return None
            decision, expires = hit
            if time.monotonic() > expires:
                del self._entries[(origin, phash, rhash)]
                return None
            return decision

    def put(self, origin: str, phash: str | None, rhash: str, decision: Decision, ttl: float | None = None) -> None:
        with self._lock:
            self._entries[(origin, phash, rhash)] = (
                decision,
                time.monotonic() + (self.ttl if ttl is None else ttl),
            )

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


# Per-(origin, policy-hash) serialization so concurrent requests cannot both
# miss a freshly recorded override.
_decide_locks: dict[tuple[str, str | None], threading.Lock] = {}
_decide_locks_guard = threading.Lock()


def _decide_lock(origin: str, phash: str | None) -> threading.Lock:
    with _decide_locks_guard:
        return _decide_locks.setdefault((origin, phash), threading.Lock())


def decide_site(
    origin: str,
    policy: PrivacyPolicy | None,
    rs: RuleSet,
    schema: DataSchema,
    overrides: OverrideStore,
    cache: DecisionCache,
) -> Decision:
    """Full decision path for one origin: override, then cache, then evaluate.

    ``policy`` is None when the caller could not obtain one (missing or
    fetch/parse failure).
    """
    phash = policy_hash(policy) if policy is not None else None
    with _decide_lock(origin, phash):
        if phash is not None:
            entry = overrides.get(origin, phash)
            if entry is not None:
                return Decision(
                    action=entry.action,
                    fired_rule="override",
                    ruleset_name=rs.name,
                    explanation=f"remembered user decision ({entry.scope}) from {entry.created_at}",
                    policy_hash=phash,
                    decided_at=_now(),
                )
        rhash = ruleset_hash(rs)
        cached = cache.get(origin, phash, rhash)
        if cached is not None:
            return cached
        if policy is None:
            decision = missing_policy_decision(rs)
        else:
            decision = evaluate(policy, rs, schema)
        cache.put(origin, phash, rhash, decision)
        return decision
