import glob
import os
import random

import pytest
from hypothesis import given, settings

from privacyagent.lexer import ParseError
from privacyagent.policy import (
    PrivacyPolicy,
    Statement,
    parse_policy,
    render_policy_english,
    serialize_policy,
    validate_policy,
)
from privacyagent.schema import base_schema

import generators

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")
SCHEMA = base_schema()

MINIMAL = 'policy { entity "E" uri "https://e.example" disclosure "https://e.example/p" }'


def corpus_files():
    return sorted(glob.glob(os.path.join(FIXTURES, "corpus", "policy-*.ppf")))


class TestParse:
    def test_minimal_document(self):
        policy = parse_policy(MINIMAL)
        assert policy.entity_name == "E"
        assert policy.statements == ()
        assert policy.seals == ()

    def test_duplicate_purpose_reports_line(self):
        text = (
            'policy { entity "E" uri "https://e.example" disclosure "https://e.example/p"\n'
            "statement {\n"
            "purpose telemarketing, telemarketing\n"
            "recipients ours retention none data user.bday } }"
        )
        with pytest.raises(ParseError) as exc:
            parse_policy(text)
        assert "duplicate list item" in exc.value.message
        assert exc.value.line == 3

    def test_unknown_enum_token(self):
        text = MINIMAL.replace(
            "}",
            "statement { purpose world-domination recipients ours retention none data user.bday } }",
            1,
        )
        with pytest.raises(ParseError) as exc:
            parse_policy(text)
        assert "unknown purpose" in exc.value.message

    def test_unresolvable_data_ref(self):
        text = MINIMAL.replace(
            "}",
            "statement { purpose research recipients ours retention none data user.shoe-size } }",
            1,
        )
        with pytest.raises(ParseError) as exc:
            parse_policy(text)
        assert "unknown data element" in exc.value.message

    def test_relative_uri_rejected(self):
        with pytest.raises(ParseError):
            parse_policy('policy { entity "E" uri "/nope" disclosure "https://e.example/p" }')

    def test_duplicate_seal_rejected(self):
        text = MINIMAL.replace("}", 'seal "A" seal "A" }', 1)
        with pytest.raises(ParseError):
            parse_policy(text)

    def test_unknown_top_level_block_rejected(self):
        with pytest.raises(ParseError):
            parse_policy(MINIMAL + ' extras { foo "bar" }')


class TestSerialize:
    def test_minimal_is_four_lines(self):
        policy = parse_policy(MINIMAL)
        text = serialize_policy(policy)
        assert text.endswith("\n")
        assert len(text.rstrip("\n").split("\n")) == 4

    def test_purposes_in_enum_declaration_order(self):
        text = MINIMAL.replace(
            "}",
            "statement { purpose telemarketing, core-service recipients ours retention none data user.bday } }",
            1,
        )
        out = serialize_policy(parse_policy(text))
        assert "purpose core-service, telemarketing" in out

    def test_corpus_round_trip_idempotent(self):
        files = corpus_files()
        assert len(files) == 20
        for path in files:
            with open(path, encoding="utf-8") as fh:
                original = fh.read()
            once = serialize_policy(parse_policy(original, SCHEMA))
            twice = serialize_policy(parse_policy(once, SCHEMA))
            assert once == twice == original

    def test_seeded_round_trip_1000(self):
        rng = random.Random(7)
        for _ in range(1000):
            policy = generators.random_policy(rng)
            assert parse_policy(serialize_policy(policy), SCHEMA) == policy

    @settings(max_examples=200)
    @given(generators.policies)
    def test_round_trip_property(self, policy):
        assert parse_policy(serialize_policy(policy), SCHEMA) == policy


class TestValidate:
    def test_no_statements_warning(self):
        issues = validate_policy(parse_policy(MINIMAL), SCHEMA)
        assert any("discloses nothing" in i.message for i in issues)
        assert all(i.severity == "warning" for i in issues)

    def test_overlap_warning(self):
        stmt = Statement(
            purposes=frozenset({"research"}),
            recipients=frozenset({"ours"}),
            retention="none",
            data_refs=("user.name.given",),
        )
        policy = PrivacyPolicy("E", "https://e.example", "https://e.example/p", (), (stmt, stmt))
        issues = validate_policy(policy, SCHEMA)
        assert any("covered by multiple statements" in i.message for i in issues)

    def test_corpus_issue_counts_match_frozen_table(self):
        with open(os.path.join(FIXTURES, "validate_expectations.txt"), encoding="utf-8") as fh:
            expectations = fh.read().splitlines()
        for line, path in zip(expectations, corpus_files()):
            name, _, errors, _, warnings = line.split()
            assert name == os.path.basename(path).removesuffix(".ppf")
            with open(path, encoding="utf-8") as fh:
                issues = validate_policy(parse_policy(fh.read(), SCHEMA), SCHEMA)
            assert sum(1 for i in issues if i.severity == "error") == int(errors)
            assert sum(1 for i in issues if i.severity == "warning") == int(warnings)


class TestRender:
    def test_header_only_for_empty_policy(self):
        policy = parse_policy(MINIMAL)
        text = render_policy_english(policy)
        assert "E" in text
        assert "no statements about data collection" in text

    def test_template_phrases(self):
        text = MINIMAL.replace(
            "}",
            "statement { purpose core-service recipients ours retention stated-purpose data user.home-info.online.email } }",
            1,
        )
        rendered = render_policy_english(parse_policy(text))
        assert "only for the service you requested" in rendered
        assert "not shared beyond this site" in rendered

    def test_injective_on_corpus(self):
        renderings = []
        for path in corpus_files():
            with open(path, encoding="utf-8") as fh:
                renderings.append(render_policy_english(parse_policy(fh.read(), SCHEMA)))
        assert len(set(renderings)) == len(renderings) == 20


class TestErrorLocality:
    def test_corrupted_token_reported_within_one_line(self):
        with open(corpus_files()[0], encoding="utf-8") as fh:
            canonical = fh.read()
        lines = canonical.split("\n")
        for lineno, line in enumerate(lines, start=1):
            words = line.split()
            if not words:
                continue
            corrupted_line = line.replace(words[-1], "@@@", 1)
            corrupted = "\n".join(lines[: lineno - 1] + [corrupted_line] + lines[lineno:])
            with pytest.raises(ParseError) as exc:
                parse_policy(corrupted, SCHEMA)
            assert abs(exc.value.line - lineno) <= 1


class TestFuzzTotality:
    def test_mutated_inputs_never_crash(self):
        rng = random.Random(99)
        with open(corpus_files()[4], encoding="utf-8") as fh:
            base = fh.read()
        for _ in range(2000):
            chars = list(base)
            for _ in range(rng.randint(1, 6)):
                op = rng.randint(0, 2)
                pos = rng.randrange(len(chars)) if chars else 0
                if op == 0 and chars:
                    chars[pos] = chr(rng.randint(0, 255))
                elif op == 1 and chars:
                    del chars[pos]
                else:
                    chars.insert(pos, chr(rng.randint(0, 255)))
            mutated = "".join(chars)
            try:
                parse_policy(mutated, SCHEMA)
            except ParseError:
                pass
