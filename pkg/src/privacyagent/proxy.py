"""HTTP forward proxy enforcing the four actions on live traffic.

accept forwards unchanged, inform forwards and emits a notice event, warn
holds the request on a pending prompt (fail-closed on timeout), and block
returns a self-contained 403 page. HTTPS is tunneled opaquely via CONNECT;
enforcement granularity there is allow / refuse-tunnel.
"""

from __future__ import annotations

import html
import http.client
import select
import socket
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlparse

from .agent import AgentState, normalize_origin

HOP_BY_HOP = {
    "connection",
    "keep-alive",
    "proxy-authenticate",
    "proxy-authorization",
    "proxy-connection",
    "te",
    "trailers",
    "transfer-encoding",
    "upgrade",
}


def block_page(origin: str, decision, disclosure_uri: str | None = None, timed_out: bool = False) -> bytes:
    """Self-contained markup naming the fired rule; no external resources."""
    reason = "Request blocked by your privacy preferences."
    if timed_out:
        reason = "Request blocked: the warning prompt timed out without an answer."
    disclosure = ""
    if disclosure_uri:
        disclosure = f'<p>Site policy page: <a href="{html.escape(disclosure_uri)}">{html.escape(disclosure_uri)}</a></p>'
    fired = html.escape(decision.fired_rule) if decision else "unknown"
    explanation = html.escape(decision.explanation) if decision else ""
    ruleset = html.escape(decision.ruleset_name) if decision else ""
    body = f"""<!DOCTYPE html>
<html><head><title>Blocked by privacy agent</title></head>
<body>
<h1>Blocked by privacy agent</h1>
<p>{html.escape(reason)}</p>
<p>Site: {html.escape(origin)}</p>
<p>Ruleset: {ruleset} &mdash; fired rule: {fired}</p>
<p>{explanation}</p>
{disclosure}
</body></html>
"""
    return body.encode("utf-8")


class ProxyHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: AgentState  # set by make_proxy_server

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    # -- plain HTTP methods ---------------------------------------------

    def do_GET(self):
        self._handle()

    def do_POST(self):
        self._handle()

    def do_PUT(self):
        self._handle()

    def do_DELETE(self):
        self._handle()

    def do_HEAD(self):
        self._handle()

    def do_OPTIONS(self):
        self._handle()

    def do_PATCH(self):
        self._handle()

    def _handle(self):
        parsed = urlparse(self.path)
        if parsed.scheme not in ("http",) or not parsed.hostname:
            self._send_simple(400, b"proxy requires absolute-form http request targets")
            return
        origin = normalize_origin(parsed.scheme, parsed.hostname, parsed.port)
        try:
            decision, fetch = self.state.decide_for_origin(origin)
        except Exception:
            self._send_simple(502, b"privacy agent internal error")
            return
        action = decision.action
        if action == "warn":
            prompt = self.state.create_prompt(origin, decision, fetch)
            try:
                resolution = prompt.wait(self.state.config.warn_timeout)
            except Exception:
                resolution = "timed-out"  # prompt channel failure degrades to block
            if resolution == "timed-out":
                self.state.finish_prompt_timeout(prompt)
            if resolution != "allow":
                self._send_block(origin, decision, fetch, timed_out=(resolution == "timed-out"))
                return
        elif action == "block":
            self._send_block(origin, decision, fetch)
            return
        elif action == "inform":
            self.state.events.publish(
                "notice",
                {"origin": origin, "explanation": decision.explanation, "fired-rule": decision.fired_rule},
            )
        self._forward(parsed, origin)

    def _send_block(self, origin, decision, fetch, timed_out=False):
        disclosure = None
        if fetch is not None and fetch.outcome == "found" and fetch.policy is not None:
            disclosure = fetch.policy.disclosure_uri
        body = block_page(origin, decision, disclosure_uri=disclosure, timed_out=timed_out)
        self.send_response(403)
        self.send_header("Content-Type", "text/html; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        if timed_out:
            self.send_header("X-Privacy-Agent", "prompt-timed-out")
        else:
            self.send_header("X-Privacy-Agent", "blocked")
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(body)

    def _forward(self, parsed, origin):
        host = parsed.hostname
        port = parsed.port or 80
        path = parsed.path or "/"
        if parsed.query:
            path += "?" + parsed.query
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else None

        headers = {}
        for name, value in self.headers.items():
            lname = name.lower()
            if lname in HOP_BY_HOP:
                continue
            if lname == "referer" and self.state.config.strip_referrer:
                continue
            if lname == "cookie" and self.state.config.block_cookies:
                continue
            headers[name] = value
        headers["Connection"] = "close"

        try:
            conn = http.client.HTTPConnection(host, port, timeout=30)
            conn.request(self.command, path, body=body, headers=headers)
            resp = conn.getresponse()
            payload = resp.read()
        except OSError:
            self._send_simple(502, b"upstream connection failed")
            return

        set_cookie_values = resp.headers.get_all("Set-Cookie") or []
        if set_cookie_values:
            self.state.note_cookies(origin)
        hint = resp.headers.get("Privacy-Policy")
        if hint:
            self.state.header_hints[origin] = hint

        self.send_response(resp.status, resp.reason)
        for name, value in resp.headers.items():
            lname = name.lower()
            if lname in HOP_BY_HOP or lname == "content-length":
                continue
            if lname == "set-cookie" and self.state.config.block_cookies:
                continue
            self.send_header(name, value)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(payload)
        conn.close()

    # -- HTTPS tunneling -------------------------------------------------

    def do_CONNECT(self):
        host, _, port_s = self.path.partition(":")
        port = int(port_s or 443)
        origin = normalize_origin("https", host, port)
        try:
            decision, fetch = self.state.decide_for_origin(origin)
        except Exception:
            self._send_simple(502, b"privacy agent internal error")
            return
        action = decision.action
        if action == "warn":
            prompt = self.state.create_prompt(origin, decision, fetch)
            resolution = prompt.wait(self.state.config.warn_timeout)
            if resolution == "timed-out":
                self.state.finish_prompt_timeout(prompt)
            if resolution != "allow":
                self._send_simple(403, b"tunnel refused by privacy agent")
                return
        elif action == "block":
            self._send_simple(403, b"tunnel refused by privacy agent")
            return
        elif action == "inform":
            self.state.events.publish(
                "notice",
                {"origin": origin, "explanation": decision.explanation, "fired-rule": decision.fired_rule},
            )
        try:
            upstream = socket.create_connection((host, port), timeout=30)
        except OSError:
            self._send_simple(502, b"upstream connection failed")
            return
        self.send_response(200, "Connection Established")
        self.end_headers()
        self._pump(self.connection, upstream)

    def _pump(self, a: socket.socket, b: socket.socket) -> None:
        sockets = [a, b]
        try:
            while True:
                readable, _, _ = select.select(sockets, [], [], 60)
                if not readable:
                    break
                done = False
                for src in readable:
                    dst = b if src is a else a
                    data = src.recv(65536)
                    if not data:
                        done = True
                        break
                    dst.sendall(data)
                if done:
                    break
        except OSError:
            pass
        finally:
            for sock in (a, b):
                try:
                    sock.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                try:
                    sock.close()
                except OSError:
                    pass
            self.close_connection = True

    def _send_simple(self, code: int, body: bytes):
        self.send_response(code)
        self.send_header("Content-Type", "text/plain; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        try:
            self.wfile.write(body)
        except OSError:
            pass


def make_proxy_server(state: AgentState) -> ThreadingHTTPServer:
    handler = type("BoundProxyHandler", (ProxyHandler,), {"state": state})
    server = ThreadingHTTPServer((state.config.proxy_host, state.config.proxy_port), handler)
    server.daemon_threads = True
    return server
