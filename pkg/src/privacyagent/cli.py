"""Command-line surface: validation, rendering, evaluation, repository
management, form workflows, preset export, and running the proxy.

Exit codes: 0 success; 1 parse/validation error; 2 evaluation yielded block
under --fail-on-block; 3 I/O or config error. Errors go to stderr, machine
output to stdout.
"""

from __future__ import annotations

import argparse
import sys

from .config import AgentConfig, ConfigError
from .engine import Decision, evaluate
from .forms import (
    CouplingError,
    check_coupling,
    generate_form,
    parse_data_request,
    serialize_coverage,
    serialize_form,
)
from .lexer import ParseError, escape_string, tokenize
from .policy import parse_policy, render_policy_english, serialize_policy, validate_policy
from .repository import (
    RepoError,
    Repository,
    dumps_repository,
    load_repository,
    repo_delete,
    repo_get,
    repo_set,
    save_repository,
)
from .rules import UnknownPreset, parse_ruleset, preset, preset_text, ruleset_warnings
from .schema import ConflictError, DataSchema, base_schema, load_schema_extension

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_BLOCK = 2
EXIT_IO = 3


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_schema(args) -> DataSchema:
    schema = base_schema()
    for path in args.schema or []:
        schema = load_schema_extension(_read_input(path), schema)
    return schema


def _guess_kind(path: str, text: str) -> str:
    if path.endswith(".ppf"):
        return "policy"
    if path.endswith(".apr"):
        return "ruleset"
    if path.endswith(".pdr"):
        return "data-request"
    # stdin or unknown extension: look at the leading keyword
    toks = tokenize(text)
    head = toks[0].value if toks else ""
    if head in ("policy", "ruleset", "data-request"):
        return head
    raise ParseError(1, 1, f"cannot determine document kind from {head!r}")


def _load_ruleset(spec: str):
    if spec.startswith("preset:"):
        return preset(spec.split(":", 1)[1])
    return parse_ruleset(_read_input(spec))


def _print_decision(decision: Decision) -> None:
    print(f"action {decision.action}")
    print(f"fired-rule {decision.fired_rule}")
    print(f"ruleset {escape_string(decision.ruleset_name)}")
    print(f"explanation {escape_string(decision.explanation)}")
    if decision.policy_hash is not None:
        print(f"policy-hash {escape_string(decision.policy_hash)}")


def cmd_validate(args) -> int:
    text = _read_input(args.file)
    schema = _load_schema(args)
    kind = args.kind or _guess_kind(args.file, text)
    if kind == "policy":
        policy = parse_policy(text, schema)
        issues = validate_policy(policy, schema)
        for issue in issues:
            print(f"{issue.severity} {issue.location} {escape_string(issue.message)}")
        if any(i.severity == "error" for i in issues):
            return EXIT_PARSE
        return EXIT_OK
    if kind == "ruleset":
        rs = parse_ruleset(text)
        for warning in ruleset_warnings(rs, schema):
            print(f"warning ruleset {escape_string(warning)}")
        return EXIT_OK
    if kind == "data-request":
        parse_data_request(text)
        return EXIT_OK
    raise ParseError(1, 1, f"unknown document kind {kind!r}")


def cmd_render(args) -> int:
    schema = _load_schema(args)
    policy = parse_policy(_read_input(args.file), schema)
    sys.stdout.write(render_policy_english(policy))
    return EXIT_OK


def cmd_eval(args) -> int:
    schema = _load_schema(args)
    policy = parse_policy(_read_input(args.policy), schema)
    rs = _load_ruleset(args.ruleset)
    decision = evaluate(policy, rs, schema)
    _print_decision(decision)
    if args.fail_on_block and decision.action == "block":
        return EXIT_BLOCK
    return EXIT_OK


def _open_repo(args, schema: DataSchema) -> Repository:
    if args.file:
        try:
            return load_repository(args.file, schema)
        except FileNotFoundError:
            return Repository()
    return Repository()


def cmd_repo(args) -> int:
    schema = _load_schema(args)
    repo = _open_repo(args, schema)
    if args.repo_cmd == "list":
        sys.stdout.write(dumps_repository(repo))
        return EXIT_OK
    if args.repo_cmd == "get":
        value = repo_get(repo, schema, args.path)
        if value is None:
            print(f"absent {args.path}")
        else:
            print(f"value {args.path} {escape_string(value)}")
        return EXIT_OK
    if args.repo_cmd == "set":
        repo = repo_set(repo, schema, args.path, args.value)
    elif args.repo_cmd == "delete":
        repo = repo_delete(repo, schema, args.path)
    if args.file:
        save_repository(repo, args.file)
    else:
        sys.stdout.write(dumps_repository(repo))
    return EXIT_OK


def cmd_form(args) -> int:
    schema = _load_schema(args)
    request = parse_data_request(_read_input(args.request))
    policy = parse_policy(_read_input(args.policy), schema)
    if args.form_cmd == "check":
        report = check_coupling(request, policy, schema)
        sys.stdout.write(serialize_coverage(report))
        return EXIT_OK
    repo = Repository()
    if args.repo:
        repo = load_repository(args.repo, schema)
    try:
        form = generate_form(request, policy, repo, schema)
    except CouplingError as exc:
        for leaf in exc.uncovered:
            print(f"uncovered {leaf}", file=sys.stderr)
        print("error: request not fully covered by policy", file=sys.stderr)
        return EXIT_PARSE
    sys.stdout.write(serialize_form(form))
    return EXIT_OK


def cmd_preset(args) -> int:
    sys.stdout.write(preset_text(args.name))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .agent import AgentState
    from .control import make_control_server
    from .proxy import make_proxy_server
    import threading

    config = AgentConfig.from_file(args.config) if args.config else AgentConfig()
    state = AgentState(config)
    proxy_server = make_proxy_server(state)
    control_server = make_control_server(state)
    threading.Thread(target=control_server.serve_forever, daemon=True).start()
    print(
        f"proxy on {config.proxy_host}:{config.proxy_port}, "
        f"control API on {config.control_host}:{config.control_port}",
        file=sys.stderr,
    )
    try:
        proxy_server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        proxy_server.shutdown()
        control_server.shutdown()
        state.overrides.save()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privacyagent")
    parser.add_argument(
        "--schema", action="append", metavar="PDS", help="extension schema file (repeatable)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a .ppf/.apr/.pdr document")
    p.add_argument("file", help="document path, or - for stdin")
    p.add_argument("--kind", choices=["policy", "ruleset", "data-request"])
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="render a policy as English text")
    p.add_argument("file")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="evaluate a policy against a ruleset")
    p.add_argument("--policy", required=True)
    p.add_argument("--ruleset", required=True, help="path to .apr file, or preset:NAME")
    p.add_argument("--fail-on-block", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("repo", help="user data repository operations")
    p.add_argument("--file", help="repository .prf file")
    rsub = p.add_subparsers(dest="repo_cmd", required=True)
    for name in ("set", "get", "delete", "list"):
        rp = rsub.add_parser(name)
        if name != "list":
            rp.add_argument("path")
        if name == "set":
            rp.add_argument("value")
    p.set_defaults(func=cmd_repo)

    p = sub.add_parser("form", help="coupling check and annotated form generation")
    fsub = p.add_subparsers(dest="form_cmd", required=True)
    for name in ("check", "fill"):
        fp = fsub.add_parser(name)
        fp.add_argument("--request", required=True)
        fp.add_argument("--policy", required=True)
        if name == "fill":
            fp.add_argument("--repo")
    p.set_defaults(func=cmd_form)

    p = sub.add_parser("preset", help="canned preference files")
    psub = p.add_subparsers(dest="preset_cmd", required=True)
    pe = psub.add_parser("export")
    pe.add_argument("name")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("serve", help="run the enforcing proxy until interrupted")
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_serve)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: line {exc.line}, column {exc.column}: {exc.message}", file=sys.stderr)
        return EXIT_PARSE
    except (ConflictError, RepoError, UnknownPreset) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
