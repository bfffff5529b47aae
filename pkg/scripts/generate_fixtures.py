#!/usr/bin/env python3
"""Regenerate the committed fixture corpus and its frozen oracle tables.

Outputs (all under fixtures/):
  corpus/policy-NN.ppf           20 policies (seeded random + crafted cases)
  oracle_decisions.txt           60 decisions from the naive evaluator
  validate_expectations.txt      issue counts per corpus policy
  coupling/pair-NN.{pdr,ppf}     10 request/policy pairs
  coupling/expected.txt          uncovered leaves per pair (naive oracle)

The decision and coupling tables are produced by the independent naive
oracle in tests/naive_oracle.py, never by the engine under test.
"""

from __future__ import annotations

import os
import random
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "tests"))
sys.path.insert(0, os.path.join(ROOT, "src"))

from privacyagent.policy import (  # noqa: E402
    PrivacyPolicy,
    Statement,
    parse_policy,
    serialize_policy,
    validate_policy,
)
from privacyagent.forms import parse_data_request  # noqa: E402
from privacyagent.rules import preset  # noqa: E402
from privacyagent.schema import base_schema  # noqa: E402

import generators  # noqa: E402
import naive_oracle  # noqa: E402

FIXTURES = os.path.join(ROOT, "fixtures")
SCHEMA = base_schema()
PRESETS = ("relaxed", "cautious", "strict")


def crafted_policies() -> dict[int, PrivacyPolicy]:
    """Hand-placed corpus entries exercising specific decision paths."""
    telemarketing = PrivacyPolicy(
        entity_name="Acme Direct",
        entity_uri="https://acme-direct.example",
        disclosure_uri="https://acme-direct.example/privacy",
        seals=(),
        statements=(
            Statement(
                purposes=frozenset({"telemarketing"}),
                recipients=frozenset({"ours"}),
                retention="business-practices",
                data_refs=("user.home-info.telecom.phone",),
                consequence="We may call you about offers.",
            ),
        ),
    )
    empty = PrivacyPolicy(
        entity_name="Quiet Site",
        entity_uri="https://quiet.example",
        disclosure_uri="https://quiet.example/privacy",
        seals=("TRUSTe",),
        statements=(),
    )
    minimal_service = PrivacyPolicy(
        entity_name="Plain Shop",
        entity_uri="https://plainshop.example",
        disclosure_uri="https://plainshop.example/privacy",
        seals=("TRUSTe",),
        statements=(
            Statement(
                purposes=frozenset({"core-service"}),
                recipients=frozenset({"ours"}),
                retention="stated-purpose",
                data_refs=("user.home-info.online.email", "user.name"),
                consequence=None,
            ),
        ),
    )
    # index 3 is the telemarketing case referenced by the CLI golden test
    return {1: empty, 3: telemarketing, 5: minimal_service}


def build_corpus() -> list[PrivacyPolicy]:
    rng = random.Random(20260823)
    crafted = crafted_policies()
    corpus: list[PrivacyPolicy] = []
    seen_texts: set[str] = set()
    i = 0
    while len(corpus) < 20:
        idx = len(corpus)
        if idx in crafted:
            policy = crafted[idx]
        else:
            policy = generators.random_policy(rng)
        text = serialize_policy(policy)
        if text in seen_texts:
            i += 1
            continue
        seen_texts.add(text)
        corpus.append(policy)
    return corpus


def write_corpus(corpus: list[PrivacyPolicy]) -> None:
    outdir = os.path.join(FIXTURES, "corpus")
    os.makedirs(outdir, exist_ok=True)
    for idx, policy in enumerate(corpus):
        with open(os.path.join(outdir, f"policy-{idx:02d}.ppf"), "w", encoding="utf-8") as fh:
            fh.write(serialize_policy(policy))


def write_oracle_table(corpus: list[PrivacyPolicy]) -> None:
    rulesets = {name: preset(name) for name in PRESETS}
    lines = []
    for idx, policy in enumerate(corpus):
        for name in PRESETS:
            action, fired = naive_oracle.naive_evaluate(SCHEMA, policy, rulesets[name])
            lines.append(f"decision policy-{idx:02d} {name} {action} {fired}")
    with open(os.path.join(FIXTURES, "oracle_decisions.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_validate_table(corpus: list[PrivacyPolicy]) -> None:
    lines = []
    for idx, policy in enumerate(corpus):
        issues = validate_policy(policy, SCHEMA)
        errors = sum(1 for i in issues if i.severity == "error")
        warnings = sum(1 for i in issues if i.severity == "warning")
        lines.append(f"policy-{idx:02d} errors {errors} warnings {warnings}")
    with open(os.path.join(FIXTURES, "validate_expectations.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


COUPLING_PAIRS = [
    # (request text, policy statements as (purposes, recipients, retention, refs))
    ('data-request { for "signup" data user.name.given required, user.home-info.online.email required }',
     [({"core-service"}, {"ours"}, "stated-purpose", ("user.name", "user.home-info.online.email"))]),
    ('data-request { for "profile" data user.bday required }',
     [({"core-service"}, {"ours"}, "stated-purpose", ("user.name",))]),
    ('data-request { for "shipping" data user.home-info required }',
     [({"core-service"}, {"ours", "agents"}, "stated-purpose", ("user.home-info",))]),
    ('data-request { for "shipping" data user.home-info required }',
     [({"core-service"}, {"ours"}, "stated-purpose", ("user.home-info.postal",))]),
    ('data-request { for "newsletter" data user.home-info.online.email required, user.name optional }',
     [({"contact"}, {"ours"}, "stated-purpose", ("user.home-info.online.email",)),
      ({"customization"}, {"ours"}, "stated-purpose", ("user.name",))]),
    ('data-request { for "survey" data user.gender optional, user.bday optional }',
     [({"research"}, {"ours"}, "none", ("user.gender", "user.bday"))]),
    ('data-request { for "full" data user required }',
     [({"profiling"}, {"unrelated"}, "indefinite", ("user",))]),
    ('data-request { for "login" data user.login required }',
     [({"core-service"}, {"ours"}, "stated-purpose", ("user.login.id",))]),
    ('data-request { for "contact" data user.business-info.online.email required }',
     [({"contact"}, {"ours"}, "stated-purpose", ("user.business-info",)),
      ({"telemarketing"}, {"ours"}, "business-practices", ("user.business-info.online.email",))]),
    ('data-request { for "empty-policy" data user.name.given required }',
     []),
]


def write_coupling_fixtures() -> None:
    outdir = os.path.join(FIXTURES, "coupling")
    os.makedirs(outdir, exist_ok=True)
    expected_lines = []
    for idx, (request_text, stmt_specs) in enumerate(COUPLING_PAIRS):
        statements = tuple(
            Statement(
                purposes=frozenset(purposes),
                recipients=frozenset(recipients),
                retention=retention,
                data_refs=tuple(sorted(refs)),
            )
            for purposes, recipients, retention, refs in stmt_specs
        )
        policy = PrivacyPolicy(
            entity_name=f"Coupling Fixture {idx}",
            entity_uri=f"https://pair{idx:02d}.example",
            disclosure_uri=f"https://pair{idx:02d}.example/privacy",
            seals=(),
            statements=statements,
        )
        with open(os.path.join(outdir, f"pair-{idx:02d}.pdr"), "w", encoding="utf-8") as fh:
            fh.write(request_text + "\n")
        with open(os.path.join(outdir, f"pair-{idx:02d}.ppf"), "w", encoding="utf-8") as fh:
            fh.write(serialize_policy(policy))
        request = parse_data_request(request_text)
        _, uncovered = naive_oracle.naive_coverage(SCHEMA, request, policy)
        if uncovered:
            expected_lines.append(f"pair-{idx:02d} uncovered " + ",".join(uncovered))
        else:
            expected_lines.append(f"pair-{idx:02d} covered")
    with open(os.path.join(outdir, "expected.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(expected_lines) + "\n")


def main() -> None:
    corpus = build_corpus()
    # sanity: every corpus file must re-parse
    for policy in corpus:
        parse_policy(serialize_policy(policy), SCHEMA)
    write_corpus(corpus)
    write_oracle_table(corpus)
    write_validate_table(corpus)
    write_coupling_fixtures()
    print("fixtures regenerated under", FIXTURES)


if __name__ == "__main__":
    main()
