"""Localhost control API: status, policies, prompts, ruleset and repository
editing, form checking, and the server-push event stream the dashboard
consumes. Also serves the dashboard's static assets at / when configured.

Endpoint and body key names are frozen; see docs/api-reference.md.
"""

from __future__ import annotations

import json
import mimetypes
import os
import queue
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import unquote

from .agent import AgentState, PromptError
from .engine import InvalidAction
from .forms import (
    CouplingError,
    check_coupling,
    coverage_to_dict,
    form_to_dict,
    generate_form,
    parse_data_request,
)
from .lexer import ParseError
from .policy import render_policy_english
from .repository import RepoError, repo_delete, repo_set, save_repository
from .rules import PRESET_NAMES, preset_text
from .schema import resolve_refs, UnknownElement

_PROMPT_DECISION_RE = re.compile(r"^/api/prompts/([0-9a-f]+)/decision$")
_SITE_POLICY_RE = re.compile(r"^/api/sites/(.+)/policy$")
_REPO_PATH_RE = re.compile(r"^/api/repository/([a-z0-9.\-]+)$")


class ControlHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: AgentState  # set by make_control_server

    def log_message(self, fmt, *args):
        pass

    # -- helpers ---------------------------------------------------------

    def _json(self, code: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _read_json(self) -> dict | None:
        try:
            return json.loads(self._read_body().decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            self._json(400, {"error": "invalid JSON body"})
            return None

    # -- GET -------------------------------------------------------------

    def do_GET(self):
        state = self.state
        if self.path == "/api/status":
            self._json(200, {"sites": [s.to_dict() for s in state.all_status()]})
            return
        m = _SITE_POLICY_RE.match(self.path)
        if m:
            origin = unquote(m.group(1))
            fetch = state.discover_policy(origin)
            if fetch.outcome != "found" or fetch.policy is None:
                self._json(404, {"error": "no policy for origin", "outcome": fetch.outcome, "reason": fetch.reason})
                return
            self._json(
                200,
                {
                    "origin": origin,
                    "raw": fetch.raw_text,
                    "rendered": render_policy_english(fetch.policy),
                    "disclosure-uri": fetch.policy.disclosure_uri,
                },
            )
            return
        if self.path == "/api/prompts":
            self._json(200, {"prompts": [p.to_dict() for p in state.pending_prompts()]})
            return
        if self.path == "/api/ruleset":
            rs = state.ruleset
            self._json(200, {"name": rs.name, "text": state.ruleset_text})
            return
        if self.path == "/api/presets":
            self._json(
                200,
                {"presets": [{"name": n, "text": preset_text(n)} for n in PRESET_NAMES]},
            )
            return
        if self.path == "/api/repository":
            schema = state.schema
            elements = [
                {
                    "path": path,
                    "type": schema.elements[path].value_type,
                    "category": schema.elements[path].category,
                    "virtual": schema.elements[path].virtual,
                    "value": state.repository.values.get(path),
                }
                for path in sorted(schema.elements)
            ]
            self._json(200, {"elements": elements})
            return
        if self.path == "/api/events":
            self._serve_events()
            return
        self._serve_static()

    # -- POST / PUT ------------------------------------------------------

    def do_POST(self):
        state = self.state
        m = _PROMPT_DECISION_RE.match(self.path)
        if m:
            payload = self._read_json()
            if payload is None:
                return
            resolution = payload.get("resolution")
            remember = payload.get("remember", "none")
            if resolution not in ("allow", "block"):
                self._json(400, {"error": "resolution must be allow or block"})
                return
            if remember not in ("none", "session", "persistent"):
                self._json(400, {"error": "remember must be none, session, or persistent"})
                return
            try:
                state.resolve_prompt(m.group(1), resolution, remember)
            except PromptError as exc:
                code = 404 if exc.kind == "unknown-id" else 409
                self._json(code, {"error": exc.kind})
                return
            except InvalidAction as exc:
                self._json(400, {"error": str(exc)})
                return
            self._json(200, {"resolved": resolution})
            return
        if self.path == "/api/forms/check":
            payload = self._read_json()
            if payload is None:
                return
            origin = payload.get("origin", "")
            request_text = payload.get("request", "")
            try:
                request = parse_data_request(request_text)
            except ParseError as exc:
                self._json(422, {"error": exc.message, "line": exc.line, "column": exc.column})
                return
            fetch = state.discover_policy(origin) if origin else None
            if fetch is None or fetch.outcome != "found" or fetch.policy is None:
                self._json(404, {"error": "no policy for origin"})
                return
            try:
                for item in request.items:
                    resolve_refs(state.schema, item.ref)
            except UnknownElement as exc:
                self._json(422, {"error": str(exc)})
                return
            report = check_coupling(request, fetch.policy, state.schema)
            if report.uncovered:
                self._json(200, {"covered": False, "coverage": coverage_to_dict(report)})
                return
            form = generate_form(request, fetch.policy, state.repository, state.schema, site=origin)
            self._json(
                200,
                {"covered": True, "coverage": coverage_to_dict(report), "form": form_to_dict(form)},
            )
            return
        self._json(404, {"error": "not found"})

    def do_PUT(self):
        state = self.state
        if self.path == "/api/ruleset":
            text = self._read_body().decode("utf-8", errors="replace")
            try:
                rs = state.set_ruleset(text)
            except ParseError as exc:
                self._json(422, {"error": exc.message, "line": exc.line, "column": exc.column})
                return
            self._json(200, {"name": rs.name})
            return
        m = _REPO_PATH_RE.match(self.path)
        if m:
            path = m.group(1)
            payload = self._read_json()
            if payload is None:
                return
            value = payload.get("value")
            try:
                if value is None:
                    state.repository = repo_delete(state.repository, state.schema, path)
                else:
                    state.repository = repo_set(state.repository, state.schema, path, str(value))
            except RepoError as exc:
                code = 404 if exc.kind == "unknown-element" else 422
                self._json(code, {"error": str(exc), "kind": exc.kind})
                return
            if state.config.repository_file:
                save_repository(state.repository, state.config.repository_file)
            self._json(200, {"path": path, "value": value})
            return
        self._json(404, {"error": "not found"})

    # -- events ----------------------------------------------------------

    def _serve_events(self):
        q = self.state.events.subscribe()
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            while True:
                try:
                    kind, data = q.get(timeout=15)
                except queue.Empty:
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                chunk = f"event: {kind}\ndata: {json.dumps(data, sort_keys=True)}\n\n"
                self.wfile.write(chunk.encode("utf-8"))
                self.wfile.flush()
        except OSError:
            pass
        finally:
            self.state.events.unsubscribe(q)

    # -- static assets ---------------------------------------------------

    def _serve_static(self):
        static_dir = self.state.config.static_dir
        if not static_dir or not self.path.startswith("/") or self.path.startswith("/api/"):
            self._json(404, {"error": "not found"})
            return
        rel = self.path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(static_dir, rel))
        root = os.path.realpath(static_dir)
        if not full.startswith(root + os.sep) and full != root:
            self._json(404, {"error": "not found"})
            return
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            self._json(404, {"error": "not found"})
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            body = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_control_server(state: AgentState) -> ThreadingHTTPServer:
    handler = type("BoundControlHandler", (ControlHandler,), {"state": state})
    server = ThreadingHTTPServer((state.config.control_host, state.config.control_port), handler)
    server.daemon_threads = True
    return server
