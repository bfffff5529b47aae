"""Acceptance suite: one test per release criterion, each printing a
pass/fail line. Run with `pytest tests/test_acceptance.py -v -s`.

The proxy criteria go end-to-end against local fixture origins; the
decision criteria compare the engine against the frozen naive-oracle
tables under fixtures/.
"""

import glob
import itertools
import os
import random
import threading
import time

import requests

from privacyagent.engine import eval_atom, evaluate
from privacyagent.forms import CouplingError, check_coupling, generate_form, parse_data_request
from privacyagent.lexer import ParseError
from privacyagent.policy import PrivacyPolicy, Statement, parse_policy, serialize_policy
from privacyagent.repository import Repository
from privacyagent.rules import StatementAtom, parse_ruleset, preset, serialize_ruleset
from privacyagent.schema import base_schema

import generators
import naive_oracle
from proxy_harness import (
    SEAL_TRUSTE,
    STMT_CORE_SERVICE,
    STMT_DYNAMIC,
    STMT_TELEMARKETING,
    fixture_origin,
    policy_for_origin,
    running_agent,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")
SCHEMA = base_schema()


def report(name: str, ok: bool):
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}")
    assert ok, name


def get_via_proxy(agent, url, **kwargs):
    return requests.get(url, proxies=agent.proxies, timeout=40, **kwargs)


def wait_for_prompt(agent, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        prompts = requests.get(f"{agent.control_url}/api/prompts", timeout=5).json()["prompts"]
        if prompts:
            return prompts[0]
        time.sleep(0.05)
    raise AssertionError("no prompt appeared")


def test_four_action_completeness():
    """4 policies x 1 ruleset (cautious) exercise each action exactly once,
    end-to-end through the proxy, in under 60 s."""
    start = time.monotonic()
    observed = {}
    cases = {
        "block": policy_for_origin("ORIGIN", STMT_TELEMARKETING),
        "warn": policy_for_origin("ORIGIN", STMT_CORE_SERVICE),  # no seal
        "inform": policy_for_origin("ORIGIN", STMT_DYNAMIC, SEAL_TRUSTE),
        "accept": policy_for_origin("ORIGIN", STMT_CORE_SERVICE, SEAL_TRUSTE),
    }
    with running_agent(ruleset="preset:cautious", warn_timeout=15.0) as agent:
        for expected_action, template in cases.items():
            with fixture_origin() as origin:
                origin.policy_text = template.replace("ORIGIN", origin.origin)
                if expected_action == "warn":
                    holder = {}
                    t = threading.Thread(
                        target=lambda: holder.update(resp=get_via_proxy(agent, origin.url()))
                    )
                    t.start()
                    prompt = wait_for_prompt(agent)
                    requests.post(
                        f"{agent.control_url}/api/prompts/{prompt['id']}/decision",
                        json={"resolution": "allow"},
                        timeout=5,
                    )
                    t.join(timeout=20)
                    assert holder["resp"].status_code == 200
                else:
                    resp = get_via_proxy(agent, origin.url())
                    assert resp.status_code == (403 if expected_action == "block" else 200)
                decision = agent.state.status_for(origin.origin).last_decision
                observed[origin.origin] = decision.action
    actions = sorted(observed.values())
    elapsed = time.monotonic() - start
    report(
        "four-action completeness",
        actions == ["accept", "block", "inform", "warn"] and elapsed < 60,
    )


def test_oracle_corpus_60_decisions_byte_equal():
    with open(os.path.join(FIXTURES, "oracle_decisions.txt"), encoding="utf-8") as fh:
        expected = fh.read()
    lines = []
    files = sorted(glob.glob(os.path.join(FIXTURES, "corpus", "policy-*.ppf")))
    assert len(files) == 20
    for path in files:
        name = os.path.basename(path).removesuffix(".ppf")
        with open(path, encoding="utf-8") as fh:
            policy = parse_policy(fh.read(), SCHEMA)
        for preset_name in ("relaxed", "cautious", "strict"):
            d = evaluate(policy, preset(preset_name), SCHEMA)
            lines.append(f"decision {name} {preset_name} {d.action} {d.fired_rule}")
    produced = "\n".join(lines) + "\n"
    report("oracle corpus: 60 decisions byte-equal to frozen table", produced == expected)


def test_exhaustive_small_instance_equivalence():
    """All 1-statement policies over a 2x2x2x2 sub-vocabulary x all 9 atom
    forms: engine and naive oracle agree on 100%."""
    purposes = ["core-service", "telemarketing"]
    recipients = ["ours", "unrelated"]
    retentions = ["none", "indefinite"]
    refs = ["user.name.given", "dynamic.cookies"]
    policies = []
    for p, r, ret, ref in itertools.product(purposes, recipients, retentions, refs):
        stmt = Statement(frozenset({p}), frozenset({r}), ret, (ref,))
        policies.append(
            PrivacyPolicy("E", "https://e.example", "https://e.example/p", (), (stmt,))
        )
    assert len(policies) == 16
    rng = random.Random(42)
    preds = [generators.random_stmt_pred(rng) for _ in range(80)]
    assert len({p.kind for p in preds}) == 9
    agree = True
    checked = 0
    for policy in policies:
        for pred in preds:
            for quant in ("any", "all"):
                atom = StatementAtom(quant, pred)
                checked += 1
                if eval_atom(policy, atom, SCHEMA) != naive_oracle.naive_condition(
                    SCHEMA, policy, atom
                ):
                    agree = False
        for preset_name in ("relaxed", "cautious", "strict"):
            d = evaluate(policy, preset(preset_name), SCHEMA)
            if (d.action, d.fired_rule) != naive_oracle.naive_evaluate(
                SCHEMA, policy, preset(preset_name)
            ):
                agree = False
    report(f"exhaustive small-instance equivalence ({checked} atom checks)", agree)


def test_round_trip_fuzzing():
    rng = random.Random(20260823)
    failures = 0
    for _ in range(1000):
        policy = generators.random_policy(rng)
        if parse_policy(serialize_policy(policy), SCHEMA) != policy:
            failures += 1
    for _ in range(1000):
        ruleset = generators.random_ruleset(rng)
        if parse_ruleset(serialize_ruleset(ruleset)) != ruleset:
            failures += 1
    # 10,000 mutated inputs must never crash the parser
    seeds = [serialize_policy(generators.random_policy(rng)) for _ in range(5)]
    crashes = 0
    for i in range(10000):
        base = list(seeds[i % len(seeds)])
        for _ in range(rng.randint(1, 8)):
            op = rng.randint(0, 2)
            pos = rng.randrange(len(base)) if base else 0
            if op == 0 and base:
                base[pos] = chr(rng.randint(0, 0x2FF))
            elif op == 1 and base:
                del base[pos]
            else:
                base.insert(pos, chr(rng.randint(0, 0x2FF)))
        try:
            parse_policy("".join(base), SCHEMA)
        except ParseError:
            pass
        except Exception:
            crashes += 1
    report("round-trip fuzzing (1000+1000 identities, 10k mutations)", failures == 0 and crashes == 0)


def test_coupling_law_on_fixture_pairs():
    with open(os.path.join(FIXTURES, "coupling", "expected.txt"), encoding="utf-8") as fh:
        expected_lines = fh.read().splitlines()
    pairs = sorted(glob.glob(os.path.join(FIXTURES, "coupling", "pair-*.pdr")))
    ok = len(pairs) == 10
    for pdr_path, expected in zip(pairs, expected_lines):
        with open(pdr_path, encoding="utf-8") as fh:
            request = parse_data_request(fh.read())
        with open(pdr_path.replace(".pdr", ".ppf"), encoding="utf-8") as fh:
            policy = parse_policy(fh.read(), SCHEMA)
        reported = check_coupling(request, policy, SCHEMA)
        parts = expected.split(" ", 2)
        if parts[1] == "covered":
            if reported.uncovered:
                ok = False
            generate_form(request, policy, Repository(), SCHEMA)  # must succeed
        else:
            oracle_uncovered = parts[2].split(",")
            if list(reported.uncovered) != oracle_uncovered:
                ok = False
            try:
                generate_form(request, policy, Repository(), SCHEMA)
                ok = False
            except CouplingError as exc:
                if list(exc.uncovered) != oracle_uncovered:
                    ok = False
    report("coupling law on 10 fixture pairs", ok)


def test_enforcement_soundness():
    with fixture_origin() as origin:
        origin.policy_text = policy_for_origin(origin, STMT_CORE_SERVICE)  # no seal
        with running_agent(ruleset="preset:strict") as agent:
            resp = get_via_proxy(agent, origin.url())
            strict_ok = (
                resp.status_code == 403
                and b"hello from fixture origin" not in resp.content
                and "/content" not in origin.requests_seen
            )
    with fixture_origin() as origin:
        origin.policy_text = policy_for_origin(origin, STMT_CORE_SERVICE)
        with running_agent(ruleset="preset:relaxed") as agent:
            resp = get_via_proxy(agent, origin.url())
            relaxed_ok = resp.status_code == 200 and resp.content == b"hello from fixture origin"
    report("enforcement soundness (strict blocks, relaxed passes byte-identical)", strict_ok and relaxed_ok)


def test_prompt_lifecycle(tmp_path):
    """Warn held and resolvable; persistent override suppresses the second
    prompt; an unresolved prompt times out to block at 30 s +/- 2 s."""
    with fixture_origin() as origin:
        origin.policy_text = policy_for_origin(origin, STMT_CORE_SERVICE)
        with running_agent(
            ruleset="preset:cautious", override_file=str(tmp_path / "o.ovr")
        ) as agent:
            assert agent.state.config.warn_timeout == 30.0  # shipped default, on purpose
            holder = {}
            t = threading.Thread(target=lambda: holder.update(resp=get_via_proxy(agent, origin.url())))
            t.start()
            prompt = wait_for_prompt(agent)
            requests.post(
                f"{agent.control_url}/api/prompts/{prompt['id']}/decision",
                json={"resolution": "allow", "remember": "persistent"},
                timeout=5,
            )
            t.join(timeout=20)
            resolved_ok = holder["resp"].status_code == 200

            # second visit: no new prompt, override fires
            resp = get_via_proxy(agent, origin.url())
            override_ok = (
                resp.status_code == 200
                and agent.state.pending_prompts() == []
                and agent.state.status_for(origin.origin).last_decision.fired_rule == "override"
            )

    # timeout leg: fresh origin and agent, nobody answers the prompt
    with fixture_origin() as origin:
        origin.policy_text = policy_for_origin(origin, STMT_CORE_SERVICE)
        with running_agent(ruleset="preset:cautious") as agent:
            start = time.monotonic()
            resp = requests.get(origin.url(), proxies=agent.proxies, timeout=60)
            elapsed = time.monotonic() - start
            timeout_ok = (
                resp.status_code == 403
                and resp.headers.get("X-Privacy-Agent") == "prompt-timed-out"
                and 28.0 <= elapsed <= 32.0
            )
    report(
        f"prompt lifecycle (resolve, persistent override, timeout at {elapsed:.1f}s)",
        resolved_ok and override_ok and timeout_ok,
    )


def test_indicator_semantics():
    with fixture_origin(set_cookie=True) as origin:
        origin.policy_text = policy_for_origin(origin, STMT_CORE_SERVICE, SEAL_TRUSTE)
        with running_agent(ruleset="preset:relaxed") as agent:
            get_via_proxy(agent, origin.url())
            status = requests.get(f"{agent.control_url}/api/status", timeout=5).json()["sites"]
            row = next(s for s in status if s["origin"] == origin.origin)
            ok = (
                row["policy-enabled"] is True
                and row["cookies-seen"] is True
                and row["seals"] == ["TRUSTe"]
                and row["disclosure-uri"] == origin.origin + "/privacy.html"
            )
    report("toolbar indicator semantics (policy, cookies, seal, disclosure link)", ok)
