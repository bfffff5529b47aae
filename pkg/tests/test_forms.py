import glob
import os

import pytest

from privacyagent.forms import (
    CouplingError,
    check_coupling,
    generate_form,
    parse_data_request,
    serialize_form,
)
from privacyagent.lexer import ParseError
from privacyagent.policy import PrivacyPolicy, Statement, parse_policy
from privacyagent.repository import Repository, repo_set
from privacyagent.schema import base_schema

import naive_oracle

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")
SCHEMA = base_schema()


def make_policy(statements) -> PrivacyPolicy:
    return PrivacyPolicy("E", "https://e.example", "https://e.example/p", (), tuple(statements))


def stmt(purposes, refs, consequence=None):
    return Statement(frozenset(purposes), frozenset({"ours"}), "stated-purpose", tuple(sorted(refs)), consequence)


class TestParseRequest:
    def test_minimal(self):
        req = parse_data_request('data-request { for "signup" data user.name.given required }')
        assert req.label == "signup"
        assert len(req.items) == 1
        assert req.items[0].required

    def test_prefix_item_resolves_later(self):
        req = parse_data_request('data-request { for "x" data user.home-info optional }')
        policy = make_policy([stmt({"core-service"}, ["user.home-info"])])
        report = check_coupling(req, policy, SCHEMA)
        assert len(report.covered) == 7

    def test_missing_data_is_parse_error(self):
        with pytest.raises(ParseError):
            parse_data_request('data-request { for "x" }')


class TestCoupling:
    def test_prefix_coverage(self):
        req = parse_data_request('data-request { for "x" data user.name.given required }')
        policy = make_policy([stmt({"core-service"}, ["user.name"])])
        report = check_coupling(req, policy, SCHEMA)
        assert report.covered == {"user.name.given": 0}
        assert report.uncovered == ()

    def test_uncovered_leaf(self):
        req = parse_data_request('data-request { for "x" data user.bday required }')
        policy = make_policy([stmt({"core-service"}, ["user.name"])])
        report = check_coupling(req, policy, SCHEMA)
        assert report.uncovered == ("user.bday",)

    def test_ambiguity_resolves_to_first_statement(self):
        req = parse_data_request('data-request { for "x" data user.name.given required }')
        policy = make_policy(
            [stmt({"core-service"}, ["user.name"]), stmt({"research"}, ["user.name.given"])]
        )
        report = check_coupling(req, policy, SCHEMA)
        assert report.covered["user.name.given"] == 0
        assert report.ambiguous == ("user.name.given",)

    def test_fixture_pairs_match_naive_oracle(self):
        pairs = sorted(glob.glob(os.path.join(FIXTURES, "coupling", "pair-*.pdr")))
        assert len(pairs) == 10
        for pdr_path in pairs:
            with open(pdr_path, encoding="utf-8") as fh:
                request = parse_data_request(fh.read())
            with open(pdr_path.replace(".pdr", ".ppf"), encoding="utf-8") as fh:
                policy = parse_policy(fh.read(), SCHEMA)
            report = check_coupling(request, policy, SCHEMA)
            covered, uncovered = naive_oracle.naive_coverage(SCHEMA, request, policy)
            assert sorted(report.covered) == sorted(covered)
            assert list(report.uncovered) == uncovered

    def test_removing_statement_never_uncovers_less(self):
        req = parse_data_request('data-request { for "x" data user.name required, user.bday optional }')
        policy = make_policy([stmt({"core-service"}, ["user.name"]), stmt({"research"}, ["user.bday"])])
        full = set(check_coupling(req, policy, SCHEMA).uncovered)
        for drop in range(len(policy.statements)):
            smaller = make_policy(policy.statements[:drop] + policy.statements[drop + 1 :])
            reduced = set(check_coupling(req, smaller, SCHEMA).uncovered)
            assert full <= reduced


class TestGenerateForm:
    def test_filled_from_repository(self):
        req = parse_data_request('data-request { for "signup" data user.name.given required }')
        policy = make_policy([stmt({"core-service"}, ["user.name"], consequence="We greet you by name.")])
        repo = repo_set(Repository(), SCHEMA, "user.name.given", "Alice")
        form = generate_form(req, policy, repo, SCHEMA)
        field = form.fields[0]
        assert field.value == "Alice"
        assert field.purposes == frozenset({"core-service"})
        assert field.consequence == "We greet you by name."
        assert field.necessity_flag is False

    def test_blank_when_absent_from_repo(self):
        req = parse_data_request('data-request { for "x" data user.bday required }')
        policy = make_policy([stmt({"core-service"}, ["user.bday"])])
        form = generate_form(req, policy, Repository(), SCHEMA)
        assert form.fields[0].value is None
        assert form.fields[0].retention == "stated-purpose"

    def test_necessity_flag_without_core_service(self):
        req = parse_data_request('data-request { for "x" data user.home-info.telecom.phone required }')
        policy = make_policy([stmt({"telemarketing"}, ["user.home-info.telecom.phone"])])
        form = generate_form(req, policy, Repository(), SCHEMA)
        assert form.fields[0].necessity_flag is True

    def test_coupling_error_lists_uncovered(self):
        req = parse_data_request('data-request { for "x" data user.bday required, user.gender required }')
        policy = make_policy([stmt({"core-service"}, ["user.name"])])
        with pytest.raises(CouplingError) as exc:
            generate_form(req, policy, Repository(), SCHEMA)
        assert exc.value.uncovered == ("user.bday", "user.gender")

    def test_succeeds_iff_no_uncovered_on_fixture_pairs(self):
        pairs = sorted(glob.glob(os.path.join(FIXTURES, "coupling", "pair-*.pdr")))
        for pdr_path in pairs:
            with open(pdr_path, encoding="utf-8") as fh:
                request = parse_data_request(fh.read())
            with open(pdr_path.replace(".pdr", ".ppf"), encoding="utf-8") as fh:
                policy = parse_policy(fh.read(), SCHEMA)
            report = check_coupling(request, policy, SCHEMA)
            if report.uncovered:
                with pytest.raises(CouplingError) as exc:
                    generate_form(request, policy, Repository(), SCHEMA)
                assert exc.value.uncovered == report.uncovered
            else:
                form = generate_form(request, policy, Repository(), SCHEMA)
                assert {f.path for f in form.fields} == set(report.covered)

    def test_serialization_is_deterministic(self):
        req = parse_data_request('data-request { for "x" data user.name.given required }')
        policy = make_policy([stmt({"core-service"}, ["user.name"])])
        repo = repo_set(Repository(), SCHEMA, "user.name.given", "Alice")
        a = serialize_form(generate_form(req, policy, repo, SCHEMA))
        b = serialize_form(generate_form(req, policy, repo, SCHEMA))
        assert a == b
        assert "value \"Alice\"" in a
