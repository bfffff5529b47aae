"""Independent brute-force re-implementation of rule evaluation.

Written and frozen before the engine was wired into anything; kept
deliberately dumb (explicit loops over the schema table, no shared helper
code with the package's engine) so it can serve as the oracle the engine
is checked against.
"""

from __future__ import annotations

from privacyagent.rules import And, Not, Or, SealAtom, StatementAtom


def expand_ref(schema, ref):
    """All leaves a ref stands for, by scanning the whole element table."""
    leaves = []
    for path in schema.elements:
        if path == ref or path.startswith(ref + "."):
            leaves.append(path)
    return sorted(leaves)


def statement_leaf_info(schema, stmt):
    """(leaf set, category set) for one statement."""
    leaves = set()
    for ref in stmt.data_refs:
        for leaf in expand_ref(schema, ref):
            leaves.add(leaf)
    categories = set()
    for leaf in leaves:
        categories.add(schema.elements[leaf].category)
    return leaves, categories


def naive_stmt_pred(schema, stmt, pred):
    leaves, categories = statement_leaf_info(schema, stmt)
    if pred.kind == "purpose-includes":
        return pred.values[0] in stmt.purposes
    if pred.kind == "purpose-within":
        for p in stmt.purposes:
            if p not in pred.values:
                return False
        return True
    if pred.kind == "recipients-includes":
        return pred.values[0] in stmt.recipients
    if pred.kind == "recipients-within":
        for r in stmt.recipients:
            if r not in pred.values:
                return False
        return True
    if pred.kind == "retention-is":
        return stmt.retention == pred.values[0]
    if pred.kind == "retention-in":
        return stmt.retention in pred.values
    if pred.kind == "data-under":
        target = pred.values[0]
        for leaf in leaves:
            if leaf == target or leaf.startswith(target + "."):
                return True
        return False
    if pred.kind == "data-includes":
        return pred.values[0] in leaves
    if pred.kind == "category-includes":
        return pred.values[0] in categories
    raise AssertionError(pred.kind)


def naive_condition(schema, policy, cond):
    if isinstance(cond, Not):
        return not naive_condition(schema, policy, cond.child)
    if isinstance(cond, And):
        for part in cond.parts:
            if not naive_condition(schema, policy, part):
                return False
        return True
    if isinstance(cond, Or):
        for part in cond.parts:
            if naive_condition(schema, policy, part):
                return True
        return False
    if isinstance(cond, StatementAtom):
        results = [naive_stmt_pred(schema, s, cond.pred) for s in policy.statements]
        if cond.quantifier == "any":
            return True in results
        return False not in results
    if isinstance(cond, SealAtom):
        if cond.seal_name is None:
            return len(policy.seals) > 0
        return cond.seal_name in policy.seals
    raise AssertionError(cond)


def naive_evaluate(schema, policy, ruleset):
    """(action, fired-rule) by walking rules top to bottom."""
    position = 0
    for rule in ruleset.rules:
        position += 1
        if naive_condition(schema, policy, rule.condition):
            return rule.action, str(position)
    return ruleset.default_action, "default"


def naive_coverage(schema, request, policy):
    """Set-intersection coupling oracle: (covered leaves, uncovered leaves)."""
    requested = []
    for item in request.items:
        for leaf in expand_ref(schema, item.ref):
            if leaf not in requested:
                requested.append(leaf)
    disclosed = set()
    for stmt in policy.statements:
        leaves, _ = statement_leaf_info(schema, stmt)
        disclosed |= leaves
    covered = [leaf for leaf in requested if leaf in disclosed]
    uncovered = [leaf for leaf in requested if leaf not in disclosed]
    return covered, uncovered
